use serde::{Deserialize, Serialize};

use crate::snn::{LifParams, SnnError};

/// Neuron parameter rows of the NEST network parameter table.
pub mod table4 {
    use crate::snn::LifParams;

    pub fn sptc() -> LifParams {
        LifParams {
            e_l_mv: -60.5,
            c_m_pf: 25.0,
            tau_m_ms: 20.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 10.0,
            tau_syn_inh_ms: 10.0,
            v_th_mv: -60.0,
            v_reset_mv: -60.5,
            v_init_mv: -60.5,
            i_offset_na: 0.0,
        }
    }

    /// Output neuron of the sEMD / TDE row.
    pub fn tde() -> LifParams {
        LifParams {
            e_l_mv: -60.0,
            c_m_pf: 250.0,
            tau_m_ms: 10.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 10.0,
            tau_syn_inh_ms: 10.0,
            v_th_mv: -30.0,
            v_reset_mv: -85.0,
            v_init_mv: -60.0,
            i_offset_na: 0.0,
        }
    }

    pub fn int() -> LifParams {
        LifParams {
            e_l_mv: -70.0,
            c_m_pf: 250.0,
            tau_m_ms: 20.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 5.0,
            tau_syn_inh_ms: 5.0,
            v_th_mv: -40.0,
            v_reset_mv: -70.0,
            v_init_mv: -65.0,
            i_offset_na: 0.0,
        }
    }

    pub fn wta() -> LifParams {
        LifParams {
            e_l_mv: -65.0,
            c_m_pf: 250.0,
            tau_m_ms: 20.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 5.0,
            tau_syn_inh_ms: 80.0,
            v_th_mv: -50.0,
            v_reset_mv: -68.0,
            v_init_mv: -65.0,
            i_offset_na: 0.0,
        }
    }

    pub fn mot() -> LifParams {
        LifParams {
            e_l_mv: -65.0,
            c_m_pf: 250.0,
            tau_m_ms: 20.0,
            t_ref_ms: 2.0,
            tau_syn_exc_ms: 5.0,
            tau_syn_inh_ms: 5.0,
            v_th_mv: -50.0,
            v_reset_mv: -68.0,
            v_init_mv: -65.0,
            i_offset_na: 0.0,
        }
    }

    pub fn gi() -> LifParams {
        LifParams {
            e_l_mv: -65.0,
            c_m_pf: 250.0,
            tau_m_ms: 30.0,
            t_ref_ms: 2.0,
            tau_syn_exc_ms: 40.0,
            tau_syn_inh_ms: 5.0,
            v_th_mv: -50.0,
            v_reset_mv: -68.0,
            v_init_mv: -65.0,
            i_offset_na: 0.0,
        }
    }

    pub fn ofi() -> LifParams {
        LifParams {
            e_l_mv: -80.0,
            c_m_pf: 250.0,
            tau_m_ms: 200.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 100.0,
            tau_syn_inh_ms: 30.0,
            v_th_mv: -40.0,
            v_reset_mv: -80.0,
            v_init_mv: -75.0,
            i_offset_na: 0.0,
        }
    }

    pub fn et() -> LifParams {
        LifParams {
            e_l_mv: -65.0,
            c_m_pf: 250.0,
            tau_m_ms: 20.0,
            t_ref_ms: 1.0,
            tau_syn_exc_ms: 5.0,
            tau_syn_inh_ms: 80.0,
            v_th_mv: -50.0,
            v_reset_mv: -68.0,
            v_init_mv: -65.0,
            i_offset_na: 0.0,
        }
    }
}

/// Population sizes. A size of zero drops the population (and every
/// connection row touching it), which is how reduced networks for
/// characterization and unit experiments are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PopSizes {
    pub sptc_cols: u32,
    pub sptc_rows: u32,
    pub wta: u32,
    pub gi: u32,
    pub et: u32,
    pub ofi: u32,
    pub mot: u32,
    pub pois1: u32,
    pub pois2: u32,
}

impl Default for PopSizes {
    fn default() -> Self {
        PopSizes {
            sptc_cols: 64,
            sptc_rows: 20,
            wta: 64,
            gi: 1,
            et: 1,
            ofi: 1,
            mot: 96,
            pois1: 64,
            pois2: 1,
        }
    }
}

/// Connection weights, in nA, defaulting to the connection table of the NEST
/// network. Scale factors for the under-specified rows are separate fields on
/// [`NetConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub sptc_tde_na: f64,
    pub tde_int_na: f64,
    pub int_ofi_na: f64,
    pub wta_mot_na: f64,
    pub wta_gi_na: f64,
    pub et_gi_na: f64,
    pub et_mot_na: f64,
    pub gi_wta_na: f64,
    pub gi_et_na: f64,
    pub mot_wta_na: f64,
    pub mot_et_na: f64,
    pub mot_opponent_na: f64,
    pub mot_sensors_na: f64,
    pub mot_chain_na: f64,
    pub mot_self_inh_na: f64,
    pub pois1_wta_na: f64,
    pub pois2_et_na: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            sptc_tde_na: 4.0,
            tde_int_na: 1.0,
            int_ofi_na: 1e-4,
            wta_mot_na: 10.0,
            wta_gi_na: 10.0,
            et_gi_na: 10.0,
            et_mot_na: 10.0,
            gi_wta_na: -10.0,
            gi_et_na: -10.0,
            mot_wta_na: -30.0,
            mot_et_na: -30.0,
            mot_opponent_na: -10.0,
            mot_sensors_na: -30.0,
            mot_chain_na: 10.0,
            mot_self_inh_na: -10.0,
            pois1_wta_na: 1.0,
            pois2_et_na: 0.3,
        }
    }
}

/// Interpretation of the `WTA(32-53) -> MOT2` mapping row. The raw table row
/// ("63 - i to 2i + 32") only yields in-range motor indices when read as
/// source `63 - i`, injection `2i + 32`, i.e. the mirror image of the MOT1
/// rule; the element-wise reading runs past the end of the 96-neuron chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mot2Mapping {
    Mirrored,
    RawElementwise,
}

/// Full network configuration. Every omitted field takes the parameter-table
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    pub sizes: PopSizes,
    pub weights: Weights,

    /// Neighbourhood half-width of the INT -> WTA inhibitory fan.
    pub n_connect: u32,

    /// TDE facilitation decay. The tables list only the synaptic time
    /// constants of the sEMD row; this is the calibrated default.
    pub tau_fac_ms: f64,

    /// Weight of one camera-event input spike onto an SPTC neuron. Tuned so
    /// that at least three of the four macropixel events within the rolling
    /// coincidence window are needed to fire.
    pub sptc_input_na: f64,

    /// Scale on the INT -> OFI weight (table value 1e-4 nA cannot drive the
    /// OFI neuron over threshold at any realisable INT rate).
    pub ofi_input_scale: f64,

    /// Scale on the POIS2 -> ET weight, calibrated for ~700 ms escape-turn
    /// latency from intersaccade start.
    pub et_drive_scale: f64,

    /// WTA recurrent excitation (self + nearest neighbour), absent from the
    /// connection table.
    pub wta_recurrent_na: f64,
    pub wta_recurrent_delay_ms: f64,

    pub mot2_mapping: Mot2Mapping,

    pub pois1_rate_hz: f64,
    pub pois2_rate_hz: f64,

    pub sptc: LifParams,
    pub tde: LifParams,
    pub int: LifParams,
    pub wta: LifParams,
    pub mot: LifParams,
    pub gi: LifParams,
    pub ofi: LifParams,
    pub et: LifParams,

    pub seed: u64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            sizes: PopSizes::default(),
            weights: Weights::default(),
            n_connect: 4,
            tau_fac_ms: 60.0,
            sptc_input_na: 0.001,
            ofi_input_scale: 1500.0,
            et_drive_scale: 0.62,
            wta_recurrent_na: 0.5,
            wta_recurrent_delay_ms: 1.0,
            mot2_mapping: Mot2Mapping::Mirrored,
            pois1_rate_hz: 100.0,
            pois2_rate_hz: 100.0,
            sptc: table4::sptc(),
            tde: table4::tde(),
            int: table4::int(),
            wta: table4::wta(),
            mot: table4::mot(),
            gi: table4::gi(),
            ofi: table4::ofi(),
            et: table4::et(),
            seed: 1,
        }
    }
}

impl NetConfig {
    /// Weight of the INT -> WTA inhibitory fan at neighbourhood offset `k`.
    /// Offsets 0..=3 reproduce the table (-5, -3, -2, -1.5); beyond that the
    /// increments keep halving towards -1.
    pub fn int_wta_weight(&self, k: u32) -> f64 {
        -(1.0 + 4.0 / f64::from(1u32 << k.min(52)))
    }

    pub fn validate(&self) -> Result<(), SnnError> {
        let bad = |m: String| Err(SnnError::BadParams(m));
        let s = &self.sizes;
        if s.sptc_cols > 0 && s.sptc_cols != 64 {
            return bad(format!("sptc_cols must be 0 or 64, got {}", s.sptc_cols));
        }
        if s.wta > 0 && s.wta != 64 {
            return bad(format!("wta size must be 0 or 64, got {}", s.wta));
        }
        if s.mot > 0 && s.mot != 96 {
            return bad(format!("mot size must be 0 or 96, got {}", s.mot));
        }
        if s.pois1 > 0 && s.wta > 0 && s.pois1 != s.wta {
            return bad(format!(
                "pois1 ({}) must match wta ({}) for the one-to-one drive",
                s.pois1, s.wta
            ));
        }
        if !(self.tau_fac_ms > 0.0) {
            return bad(format!("tau_fac_ms must be > 0, got {}", self.tau_fac_ms));
        }
        if self.sptc_input_na < 0.0 || self.et_drive_scale < 0.0 || self.ofi_input_scale < 0.0 {
            return bad("scales and input weights must be non-negative".into());
        }
        for (name, p) in [
            ("sptc", &self.sptc),
            ("tde", &self.tde),
            ("int", &self.int),
            ("wta", &self.wta),
            ("mot", &self.mot),
            ("gi", &self.gi),
            ("ofi", &self.ofi),
            ("et", &self.et),
        ] {
            p.validate()
                .map_err(|e| SnnError::BadParams(format!("{name}: {e}")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn int_wta_weights_match_table() {
        let c = NetConfig::default();
        assert_eq!(c.int_wta_weight(0), -5.0);
        assert_eq!(c.int_wta_weight(1), -3.0);
        assert_eq!(c.int_wta_weight(2), -2.0);
        assert_eq!(c.int_wta_weight(3), -1.5);
        assert_eq!(c.int_wta_weight(4), -1.25);
    }

    #[test]
    fn toml_overrides_single_field() {
        let cfg: NetConfig = toml::from_str("n_connect = 2\n[sizes]\nsptc_rows = 10\n").unwrap();
        assert_eq!(cfg.n_connect, 2);
        assert_eq!(cfg.sizes.sptc_rows, 10);
        assert_eq!(cfg.sizes.sptc_cols, 64);
        assert_eq!(cfg.weights.sptc_tde_na, 4.0);
    }
}
