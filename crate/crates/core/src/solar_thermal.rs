//! Parabolic-trough optics: incidence-angle factor and the per-MW bound on
//! absorbed thermal power that feeds the LP.

use thiserror::Error;

use crate::scenario::SolarThermalPlant;
use crate::timeseries::{TimeSeries, Unit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("incidence angle {theta} deg outside [0, 90)")]
    IncidenceAngle { theta: f64 },
    #[error("{0}")]
    Series(#[from] crate::timeseries::SeriesError),
}

/// Incidence-angle modifier `K(θ) = 1 − (7e-4·θ + 3.6e-5·θ²) / cos θ`, θ in
/// degrees. Clamped at zero; beyond roughly 75° the polynomial goes negative.
pub fn incidence_factor(theta_deg: f64) -> Result<f64, DomainError> {
    if !(0.0..90.0).contains(&theta_deg) {
        return Err(DomainError::IncidenceAngle { theta: theta_deg });
    }
    let loss = 7e-4 * theta_deg + 36e-6 * theta_deg * theta_deg;
    Ok((1.0 - loss / theta_deg.to_radians().cos()).max(0.0))
}

/// Absorbed thermal power per MW of electric rating: `i · r · η_O · η_Ef · K`.
///
/// kW/m² times m²/kWe gives kW-thermal per kWe, i.e. MW-thermal per MWe.
pub fn thermal_absorption_cap(irradiance: f64, plant: &SolarThermalPlant, k: f64) -> f64 {
    irradiance * plant.field_ratio * plant.eta_optical_peak * plant.eta_factor * k
}

/// Time-varying upper bound on absorbed thermal power per MW installed.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalProfile {
    pub max_thermal: TimeSeries,
    /// The incidence factor was taken as 1 because no angles were supplied.
    pub assumed_normal_incidence: bool,
}

pub fn build_thermal_profile(plant: &SolarThermalPlant) -> Result<ThermalProfile, DomainError> {
    let irr = plant.irradiance.values();
    let angles = plant.incidence_angle.as_ref().map(|s| s.values());
    let mut out = Vec::with_capacity(irr.len());
    for (t, &i) in irr.iter().enumerate() {
        if i == 0.0 {
            out.push(0.0);
            continue;
        }
        let k = match angles {
            Some(theta) => incidence_factor(theta[t])?,
            None => 1.0,
        };
        out.push(thermal_absorption_cap(i, plant, k));
    }
    Ok(ThermalProfile {
        max_thermal: plant.irradiance.with_values(out)?.with_unit(Unit::Ratio)?,
        assumed_normal_incidence: angles.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    /// Hand evaluation of the incidence polynomial, written out independently.
    fn k_by_hand(theta: f64) -> f64 {
        let cos = (theta * std::f64::consts::PI / 180.0).cos();
        1.0 - (0.0007 * theta + 0.000036 * theta.powi(2)) / cos
    }

    fn plant(irr: Vec<f64>, theta: Vec<f64>, r: f64, eta_o: f64, eta_ef: f64) -> SolarThermalPlant {
        let start = Utc.with_ymd_and_hms(2019, 6, 1, 0, 0, 0).unwrap();
        SolarThermalPlant {
            name: "st".into(),
            fixed_capacity: None,
            irradiance: TimeSeries::hourly(start, irr, Unit::KwPerM2).unwrap(),
            incidence_angle: Some(TimeSeries::hourly(start, theta, Unit::Degrees).unwrap()),
            field_ratio: r,
            eta_optical_peak: eta_o,
            eta_factor: eta_ef,
            eta_thermoelectric: 0.4,
            storage_hours: 7.5,
            initial_fill: 0.5,
            capex: 0.0,
            opex: 0.0,
        }
    }

    #[test]
    fn incidence_examples() {
        assert_eq!(incidence_factor(0.0).unwrap(), 1.0);
        assert!((incidence_factor(30.0).unwrap() - 0.938339).abs() < 1e-6);
        assert!((incidence_factor(60.0).unwrap() - 0.6568).abs() < 1e-4);
        assert!((incidence_factor(30.0).unwrap() - k_by_hand(30.0)).abs() < 1e-15);
    }

    #[test]
    fn incidence_domain() {
        assert!(incidence_factor(90.0).is_err());
        assert!(incidence_factor(-1.0).is_err());
        assert!(incidence_factor(f64::NAN).is_err());
        assert_eq!(incidence_factor(85.0).unwrap(), 0.0);
    }

    #[test]
    fn absorption_examples() {
        let p = plant(vec![0.0], vec![0.0], 1.0, 1.0, 1.0);
        assert_eq!(thermal_absorption_cap(0.0, &p, 1.0), 0.0);
        assert_eq!(thermal_absorption_cap(1.0, &p, 1.0), 1.0);
        let p = plant(vec![0.0], vec![0.0], 1.2, 0.75, 0.9);
        // 0.8 · 1.2 · 0.75 · 0.9 · 0.9383
        assert!((thermal_absorption_cap(0.8, &p, 0.9383) - 0.6080184).abs() < 1e-9);
    }

    #[test]
    fn profile_examples() {
        let p = plant(vec![0.0; 3], vec![10.0; 3], 1.0, 1.0, 1.0);
        assert_eq!(build_thermal_profile(&p).unwrap().max_thermal.values(), &[0.0; 3]);

        let p = plant(vec![1.0; 3], vec![0.0; 3], 1.0, 1.0, 1.0);
        assert_eq!(build_thermal_profile(&p).unwrap().max_thermal.values(), &[1.0; 3]);

        let p = plant(vec![0.0, 1.0, 0.5], vec![0.0, 30.0, 60.0], 1.0, 1.0, 1.0);
        let prof = build_thermal_profile(&p).unwrap();
        let expected = [0.0, 0.938339, 0.32840];
        for (got, want) in prof.max_thermal.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-5, "{got} vs {want}");
        }
        assert!(!prof.assumed_normal_incidence);
    }

    #[test]
    fn night_angles_of_ninety_are_ignored() {
        let p = plant(vec![0.0, 0.5], vec![90.0, 20.0], 1.0, 1.0, 1.0);
        assert!(build_thermal_profile(&p).is_ok());
        let p = plant(vec![0.1, 0.5], vec![90.0, 20.0], 1.0, 1.0, 1.0);
        assert!(build_thermal_profile(&p).is_err());
    }

    #[test]
    fn missing_angles_use_unit_factor() {
        let mut p = plant(vec![0.5, 0.7], vec![45.0, 45.0], 2.0, 1.0, 1.0);
        p.incidence_angle = None;
        let prof = build_thermal_profile(&p).unwrap();
        assert_eq!(prof.max_thermal.values(), &[1.0, 1.4]);
        assert!(prof.assumed_normal_incidence);
    }

    #[test]
    fn incidence_decreasing_on_grid() {
        let mut prev = incidence_factor(0.0).unwrap();
        for k in 1..=800 {
            let theta = k as f64 * 0.1;
            let cur = incidence_factor(theta).unwrap();
            if prev > 0.0 {
                assert!(cur < prev, "not decreasing at {theta}");
            } else {
                assert_eq!(cur, 0.0);
            }
            prev = cur;
        }
    }

    proptest! {
        #[test]
        fn absorption_linear(i1 in 0.0f64..1.2, i2 in 0.0f64..1.2, k1 in 0.0f64..1.0, k2 in 0.0f64..1.0) {
            let p = plant(vec![0.0], vec![0.0], 5.5, 0.75, 0.88);
            let f = |i, k| thermal_absorption_cap(i, &p, k);
            prop_assert!((f(i1 + i2, k1) - f(i1, k1) - f(i2, k1)).abs() < 1e-12);
            prop_assert!((f(i1, k1 + k2) - f(i1, k1) - f(i1, k2)).abs() < 1e-12);
        }

        #[test]
        fn profile_is_pointwise_composition(
            steps in proptest::collection::vec((0.0f64..1.1, 0.0f64..89.0), 1..48),
        ) {
            let (irr, theta): (Vec<f64>, Vec<f64>) = steps.into_iter().unzip();
            let p = plant(irr.clone(), theta.clone(), 4.0, 0.75, 0.9);
            let prof = build_thermal_profile(&p).unwrap();
            for t in 0..irr.len() {
                let want = thermal_absorption_cap(irr[t], &p, incidence_factor(theta[t]).unwrap());
                prop_assert_eq!(prof.max_thermal.values()[t], want);
            }
        }
    }
}
