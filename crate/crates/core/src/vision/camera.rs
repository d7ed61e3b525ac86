use serde::{Deserialize, Serialize};

/// Event polarity: ON for brightening, OFF for darkening.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarity {
    On,
    Off,
}

/// One camera event: time in microseconds (quantised to the 5 ms update
/// cycle), pixel coordinates, polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CameraEvent {
    pub t_us: u64,
    pub x: u16,
    pub y: u16,
    pub polarity: Polarity,
}

/// The simulated event camera: 128x40 pixels over a 140 degree horizontal
/// field of view, 200 Hz update rate, at most 1000 events per update cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub width: u16,
    pub height: u16,
    pub fov_deg: f64,
    pub rate_hz: f64,
    pub event_cap: usize,
    /// Brightness-difference threshold for event emission.
    pub threshold: f64,
    /// Sub-rays averaged per column when rendering (anti-aliasing).
    pub supersample: u32,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            width: 128,
            height: 40,
            fov_deg: 140.0,
            rate_hz: 200.0,
            event_cap: 1000,
            threshold: 0.1,
            supersample: 4,
        }
    }
}

impl CameraModel {
    /// Angle between adjacent pixels, ~1.094 degrees.
    pub fn pixel_pitch_deg(&self) -> f64 {
        self.fov_deg / f64::from(self.width)
    }

    /// Update cycle duration in microseconds (5000 at 200 Hz).
    pub fn cycle_us(&self) -> u64 {
        (1e6 / self.rate_hz).round() as u64
    }

    pub fn cycle_ms(&self) -> f64 {
        1e3 / self.rate_hz
    }
}

/// A brightness frame in [0, 1], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u16,
    pub height: u16,
    data: Vec<f32>,
}

impl Frame {
    pub fn filled(width: u16, height: u16, value: f32) -> Self {
        Frame {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u16, y: u16) -> f32 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u16, y: u16, v: f32) {
        self.data[y as usize * self.width as usize + x as usize] = v;
    }

    /// Fill an entire column with one value (surfaces span the full vertical
    /// field of view, so columns are vertically uniform).
    pub fn fill_column(&mut self, x: u16, v: f32) {
        for y in 0..self.height {
            self.set(x, y, v);
        }
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }
}

/// Frame-difference event generation: a pixel emits ON when it brightens by
/// more than the threshold between consecutive frames, OFF when it darkens.
/// Events are emitted in raster-scan order and truncated at the per-cycle
/// cap.
pub fn generate_events(prev: &Frame, cur: &Frame, t_us: u64, cam: &CameraModel) -> Vec<CameraEvent> {
    assert_eq!(prev.width, cur.width);
    assert_eq!(prev.height, cur.height);
    let mut events = Vec::new();
    'scan: for y in 0..cur.height {
        for x in 0..cur.width {
            let d = f64::from(cur.get(x, y)) - f64::from(prev.get(x, y));
            let polarity = if d > cam.threshold {
                Polarity::On
            } else if -d > cam.threshold {
                Polarity::Off
            } else {
                continue;
            };
            events.push(CameraEvent { t_us, x, y, polarity });
            if events.len() >= cam.event_cap {
                break 'scan;
            }
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_frames_yield_no_events() {
        let cam = CameraModel::default();
        let f = Frame::filled(128, 40, 0.5);
        assert!(generate_events(&f, &f, 0, &cam).is_empty());
    }

    #[test]
    fn single_pixel_brightening_yields_one_on_event() {
        let cam = CameraModel::default();
        let prev = Frame::filled(128, 40, 0.5);
        let mut cur = prev.clone();
        cur.set(5, 7, 0.5 + 2.0 * cam.threshold as f32);
        let ev = generate_events(&prev, &cur, 123, &cam);
        assert_eq!(ev.len(), 1);
        assert_eq!(ev[0], CameraEvent { t_us: 123, x: 5, y: 7, polarity: Polarity::On });
    }

    #[test]
    fn full_frame_inversion_hits_the_cap() {
        let cam = CameraModel { threshold: 0.1, ..CameraModel::default() };
        let mut prev = Frame::filled(128, 40, 0.0);
        let mut cur = Frame::filled(128, 40, 0.0);
        // 50%-duty grating and its inversion.
        for x in 0..128u16 {
            let v = if (x / 2) % 2 == 0 { 1.0 } else { 0.0 };
            prev.fill_column(x, v);
            cur.fill_column(x, 1.0 - v);
        }
        // Independent count of pixels whose |delta| exceeds the threshold.
        let changed = prev
            .as_slice()
            .iter()
            .zip(cur.as_slice())
            .filter(|(a, b)| (f64::from(**a) - f64::from(**b)).abs() > cam.threshold)
            .count();
        let ev = generate_events(&prev, &cur, 0, &cam);
        assert_eq!(ev.len(), changed.min(cam.event_cap));
        assert_eq!(ev.len(), 1000);
    }

    #[test]
    fn polarity_matches_stored_frames() {
        let cam = CameraModel::default();
        let prev = Frame::filled(128, 40, 0.5);
        let mut cur = prev.clone();
        cur.set(0, 0, 0.9);
        cur.set(1, 0, 0.1);
        let ev = generate_events(&prev, &cur, 0, &cam);
        for e in &ev {
            let d = f64::from(cur.get(e.x, e.y)) - f64::from(prev.get(e.x, e.y));
            match e.polarity {
                Polarity::On => assert!(d > cam.threshold),
                Polarity::Off => assert!(-d > cam.threshold),
            }
        }
        assert_eq!(ev.len(), 2);
    }
}
