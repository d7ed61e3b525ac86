//! Motion-pathway characterization: drifting square-wave gratings rendered
//! through a slow-pixel sensor model, fed through the SPTC + TDE layers, and
//! summarised as velocity- and contrast-tuning curves.

mod grating;
mod tuning;

pub use grating::{michelson_contrast, synth_grating_events, Drift, GratingSpec, SynthSensor};
pub use tuning::{
    run_characterization, CharacterizationResult, CharacterizeConfig, CurvePoint, RunResponse,
    TuningCurve,
};
