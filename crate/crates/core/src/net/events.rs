use crate::vision::CameraEvent;

/// SPTC neuron index for a camera pixel: macropixels are 2x2 camera pixels,
/// so pixel (x, y) drives SPTC (x/2, y/2) on the 64x20 grid (row-major).
#[inline]
pub fn sptc_target(x: u16, y: u16, sptc_cols: u32) -> u32 {
    u32::from(y / 2) * sptc_cols + u32::from(x / 2)
}

/// Map camera events to SPTC input-spike targets. Polarity is ignored
/// (single merged pathway). Out-of-range events are rejected and counted.
/// Returns (targets, rejected_count).
pub fn map_events_to_sptc(
    events: &[CameraEvent],
    sptc_cols: u32,
    sptc_rows: u32,
) -> (Vec<u32>, usize) {
    let mut targets = Vec::with_capacity(events.len());
    let mut rejected = 0usize;
    for e in events {
        if u32::from(e.x) >= 2 * sptc_cols || u32::from(e.y) >= 2 * sptc_rows {
            rejected += 1;
            continue;
        }
        targets.push(sptc_target(e.x, e.y, sptc_cols));
    }
    (targets, rejected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vision::Polarity;

    fn ev(x: u16, y: u16) -> CameraEvent {
        CameraEvent { t_us: 0, x, y, polarity: Polarity::On }
    }

    #[test]
    fn corner_maps_to_corner() {
        assert_eq!(sptc_target(0, 0, 64), 0);
        assert_eq!(sptc_target(127, 39, 64), 19 * 64 + 63);
    }

    #[test]
    fn macropixel_neighbours_share_a_target() {
        // Three events in macropixel (1,1): enough for the >50% rule.
        let (t, rej) = map_events_to_sptc(&[ev(2, 3), ev(3, 2), ev(3, 3)], 64, 20);
        assert_eq!(rej, 0);
        assert_eq!(t, vec![64 + 1, 64 + 1, 64 + 1]);
    }

    #[test]
    fn out_of_range_events_counted() {
        let (t, rej) = map_events_to_sptc(&[ev(0, 0), ev(200, 0), ev(0, 41)], 64, 20);
        assert_eq!(t.len(), 1);
        assert_eq!(rej, 2);
    }
}
