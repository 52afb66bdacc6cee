//! Three-layer slab waveguide dispersion relation.

use std::f64::consts::PI;

use super::DispersionError;

/// Field polarization relative to the slab interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// Electric field parallel to the interfaces.
    Te,
    /// Magnetic field parallel to the interfaces.
    Tm,
}

const BISECTION_TOLERANCE: f64 = 1e-12;

/// Effective index of the TM mode of the given order in an asymmetric slab.
pub fn slab_effective_index(
    core_index: f64,
    substrate_index: f64,
    cover_index: f64,
    thickness_nm: f64,
    wavelength_nm: f64,
    mode_order: u32,
) -> Result<f64, DispersionError> {
    slab_effective_index_pol(
        core_index,
        substrate_index,
        cover_index,
        thickness_nm,
        wavelength_nm,
        mode_order,
        Polarization::Tm,
    )
}

/// Effective index for either polarization.
///
/// Solves `κh = mπ + atan(r_s·γ_s/κ) + atan(r_c·γ_c/κ)` by bisection, where
/// `r = 1` for TE and `r = n_core²/n_clad²` for TM. The left side minus the
/// right side decreases monotonically in `n_eff`, so a sign change across
/// `(max(n_s, n_c), n_core)` brackets exactly one root for each order.
pub fn slab_effective_index_pol(
    core_index: f64,
    substrate_index: f64,
    cover_index: f64,
    thickness_nm: f64,
    wavelength_nm: f64,
    mode_order: u32,
    polarization: Polarization,
) -> Result<f64, DispersionError> {
    let clad_max = substrate_index.max(cover_index);
    if !(core_index > clad_max) || substrate_index <= 0.0 || cover_index <= 0.0 {
        return Err(DispersionError::InvalidInput(format!(
            "core index {core_index} must exceed both claddings ({substrate_index}, {cover_index})"
        )));
    }
    if !(thickness_nm > 0.0) || !(wavelength_nm > 0.0) {
        return Err(DispersionError::InvalidInput(format!(
            "thickness {thickness_nm} nm and wavelength {wavelength_nm} nm must be positive"
        )));
    }

    let k0 = 2.0 * PI / wavelength_nm;
    let (rs, rc) = match polarization {
        Polarization::Te => (1.0, 1.0),
        Polarization::Tm => (
            (core_index / substrate_index).powi(2),
            (core_index / cover_index).powi(2),
        ),
    };
    let order = f64::from(mode_order);
    let residual = |n: f64| {
        let kappa = k0 * (core_index * core_index - n * n).max(0.0).sqrt();
        let gs = k0 * (n * n - substrate_index * substrate_index).max(0.0).sqrt();
        let gc = k0 * (n * n - cover_index * cover_index).max(0.0).sqrt();
        kappa * thickness_nm - order * PI - (rs * gs).atan2(kappa) - (rc * gc).atan2(kappa)
    };

    let mut lo = clad_max;
    let mut hi = core_index;
    if residual(lo) <= 0.0 {
        return Err(DispersionError::Cutoff {
            wavelength_nm,
            thickness_nm,
            mode_order,
        });
    }
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let n_eff = 0.5 * (lo + hi);
    if n_eff <= clad_max || n_eff >= core_index {
        return Err(DispersionError::Cutoff {
            wavelength_nm,
            thickness_nm,
            mode_order,
        });
    }
    Ok(n_eff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thick_film_approaches_core_index() {
        let n = slab_effective_index(2.2, 1.44, 1.0, 40_000.0, 1550.0, 0).unwrap();
        assert!(n < 2.2 && 2.2 - n < 1e-4, "{n}");
    }

    #[test]
    fn thin_film_is_cut_off() {
        let r = slab_effective_index(2.2, 1.44, 1.0, 50.0, 1550.0, 0);
        assert!(matches!(r, Err(DispersionError::Cutoff { .. })), "{r:?}");
    }

    #[test]
    fn root_scan_value_800nm() {
        // Dense root scan of the pole-free characteristic function, computed
        // independently before the build.
        let n = slab_effective_index(2.2, 1.44, 1.0, 800.0, 1550.0, 0).unwrap();
        assert!((n - 2.025_074_037_721_687).abs() < 1e-9, "{n}");
    }

    #[test]
    fn higher_orders_descend() {
        let n0 = slab_effective_index(2.2, 1.44, 1.0, 3000.0, 1550.0, 0).unwrap();
        let n1 = slab_effective_index(2.2, 1.44, 1.0, 3000.0, 1550.0, 1).unwrap();
        let n2 = slab_effective_index(2.2, 1.44, 1.0, 3000.0, 1550.0, 2).unwrap();
        assert!(n0 > n1 && n1 > n2);
    }

    #[test]
    fn te_sits_above_tm() {
        let te = slab_effective_index_pol(2.2, 1.44, 1.0, 800.0, 1550.0, 0, Polarization::Te)
            .unwrap();
        let tm = slab_effective_index(2.2, 1.44, 1.0, 800.0, 1550.0, 0).unwrap();
        assert!(te > tm);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(slab_effective_index(1.4, 1.44, 1.0, 800.0, 1550.0, 0).is_err());
        assert!(slab_effective_index(2.2, 1.44, 1.0, 0.0, 1550.0, 0).is_err());
        assert!(slab_effective_index(2.2, 1.44, 1.0, -5.0, 1550.0, 0).is_err());
    }
}
