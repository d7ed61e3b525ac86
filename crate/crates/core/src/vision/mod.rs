//! Simulated event camera: a 2.5D raycast renderer over grating-textured
//! surfaces, frame-difference event generation with a per-cycle event cap,
//! and the event CSV format used for recorded sensor data.

mod camera;
mod io;
mod scene;

pub use camera::{generate_events, CameraEvent, CameraModel, Frame, Polarity};
pub use io::{load_events, load_events_from, save_events, save_events_to, VisionError};
pub use scene::{render_frame, render_frame_into, Grating, Scene, Surface};
