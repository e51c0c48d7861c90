//! Pairwise-ratio estimators: Argos (star around a reference antenna) and
//! the daisy chain (neighbour to neighbour).

use crate::airlink::{MeasurementSet, PilotSet};
use crate::model::{AntennaPartition, CalibrationVector, ConstraintTag};
use crate::{CVec, CalError, Result, C64};

/// Scalar link gain `r_rx c t_tx` between two antennas of different groups,
/// read off the received block and divided by the pilot weight.
///
/// The transmitting group's pilot must be square and diagonal so the column
/// belonging to `tx` carries that antenna alone.
pub fn antenna_link(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
    tx: usize,
    rx: usize,
) -> Result<C64> {
    let locate = |a: usize| {
        partition
            .group_of(a)
            .ok_or_else(|| CalError::invalid(format!("antenna {a} out of range (M = {})", partition.m())))
    };
    let (gt, gr) = (locate(tx)?, locate(rx)?);
    if gt == gr {
        return Err(CalError::invalid(format!("antennas {tx} and {rx} share group {gt}")));
    }
    let p = pilots.get(gt);
    let k = tx - partition.offset(gt);
    let diagonal =
        p.is_square() && p.iter().enumerate().all(|(n, v)| n % (p.nrows() + 1) == 0 || *v == C64::new(0.0, 0.0));
    if !diagonal {
        return Err(CalError::invalid(format!("pilot of group {gt} does not isolate single antennas")));
    }
    let y = ms.require(gt, gr)?;
    let w = p[(k, k)];
    if w.norm() == 0.0 {
        return Err(CalError::DivisionDomain(format!("zero pilot weight for antenna {tx}")));
    }
    Ok(y[(rx - partition.offset(gr), k)] / w)
}

fn ratio(num: C64, den: C64, what: impl FnOnce() -> String) -> Result<C64> {
    if den.norm() == 0.0 || !den.is_finite() {
        return Err(CalError::DivisionDomain(what()));
    }
    Ok(num / den)
}

fn tag_for(f1: C64) -> ConstraintTag {
    if f1 == C64::new(1.0, 0.0) {
        ConstraintTag::Fcc
    } else {
        ConstraintTag::None
    }
}

/// `f_i = f_1 · y_{i→1} / y_{1→i}` with antenna 0 as the reference.
pub fn argos_estimate(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
    f1: C64,
) -> Result<CalibrationVector> {
    let m = partition.m();
    if partition.size(0) != 1 {
        return Err(CalError::invalid("the reference antenna must form a group of its own"));
    }
    let mut f = CVec::from_element(m, f1);
    for i in 1..m {
        let up = antenna_link(ms, pilots, partition, i, 0)?;
        let down = antenna_link(ms, pilots, partition, 0, i)?;
        f[i] = f1 * ratio(up, down, || format!("y(0→{i}) is zero"))?;
    }
    Ok(CalibrationVector::new(f, tag_for(f1)))
}

/// `f_i = f_{i−1} · y_{i→i−1} / y_{i−1→i}`, starting from `f_0 = 1`.
pub fn daisy_chain_estimate(
    ms: &MeasurementSet,
    pilots: &PilotSet,
    partition: &AntennaPartition,
) -> Result<CalibrationVector> {
    let m = partition.m();
    let mut f = CVec::from_element(m, C64::new(1.0, 0.0));
    for i in 1..m {
        let up = antenna_link(ms, pilots, partition, i, i - 1)?;
        let down = antenna_link(ms, pilots, partition, i - 1, i)?;
        f[i] = f[i - 1] * ratio(up, down, || format!("y({}→{i}) is zero", i - 1))?;
    }
    Ok(CalibrationVector::new(f, ConstraintTag::Fcc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{default_pilots, simulate_exchange, PilotKind, Snr, SnrConvention};
    use crate::estimators::{ls_estimate, Constraint};
    use crate::model::{
        calibration_vector, gen_channel, gen_impairments, ChannelModel, ImpairmentConfig, RfImpairments,
    };
    use crate::stacking::build_stacked;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn argos_setup(
        m: usize,
        identity: bool,
        snr: Snr,
        seed: u64,
    ) -> (MeasurementSet, PilotSet, AntennaPartition, CVec) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let p = AntennaPartition::new(vec![1, m - 1], vec![1, m - 1]).unwrap();
        let cfg = ImpairmentConfig { amplitude_spread: 0.2, fix_first_to_one: true };
        let imp = if identity { RfImpairments::identity(m) } else { gen_impairments(&cfg, m, &mut r).unwrap() };
        let chan = gen_channel(m, ChannelModel::IidRayleigh, None, &mut r).unwrap();
        let pilots = default_pilots(&p, PilotKind::Identity, &mut r).unwrap();
        let ms = simulate_exchange(&p, &pilots, &imp, &chan, snr, SnrConvention::UnitChannel, &mut r).unwrap();
        (ms, pilots, p, calibration_vector(&imp).unwrap().f)
    }

    #[test]
    fn argos_identity_gives_ones() {
        let (ms, pl, p, _) = argos_setup(6, true, Snr::Noiseless, 1);
        let f = argos_estimate(&ms, &pl, &p, C64::new(1.0, 0.0)).unwrap();
        assert!(f.f.iter().all(|v| (v - C64::new(1.0, 0.0)).norm() < 1e-12));
        assert!(f.satisfies_constraint(None));
    }

    #[test]
    fn argos_recovers_noiseless_truth() {
        let (ms, pl, p, truth) = argos_setup(8, false, Snr::Noiseless, 2);
        let f = argos_estimate(&ms, &pl, &p, truth[0]).unwrap();
        assert!((f.f - truth).norm() < 1e-10);
    }

    #[test]
    fn argos_equals_restricted_ls() {
        let (ms, pl, p, _) = argos_setup(8, false, Snr::Db(10.0), 3);
        let argos = argos_estimate(&ms, &pl, &p, C64::new(1.0, 0.0)).unwrap();
        let ls = ls_estimate(&build_stacked(&ms, &pl, &p).unwrap(), &Constraint::Fcc).unwrap();
        assert!((argos.f - ls.f_hat.f).norm() < 1e-10);
    }

    #[test]
    fn argos_zero_link_is_division_domain() {
        let (mut ms, pl, p, _) = argos_setup(4, false, Snr::Noiseless, 4);
        let mut y = ms.get(0, 1).unwrap().clone();
        y[(1, 0)] = C64::new(0.0, 0.0);
        ms.insert(0, 1, y);
        assert!(matches!(argos_estimate(&ms, &pl, &p, C64::new(1.0, 0.0)), Err(CalError::DivisionDomain(_))));
    }

    #[test]
    fn daisy_chain_matches_argos_and_truth() {
        let mut r = ChaCha8Rng::seed_from_u64(5);
        let p = AntennaPartition::singletons(7).unwrap();
        let cfg = ImpairmentConfig { amplitude_spread: 0.2, fix_first_to_one: true };
        let imp = gen_impairments(&cfg, 7, &mut r).unwrap();
        let chan = gen_channel(7, ChannelModel::IidRayleigh, None, &mut r).unwrap();
        let pilots = default_pilots(&p, PilotKind::UnitPhaseRandom, &mut r).unwrap();
        let ms =
            simulate_exchange(&p, &pilots, &imp, &chan, Snr::Noiseless, SnrConvention::UnitChannel, &mut r).unwrap();
        let chain = daisy_chain_estimate(&ms, &pilots, &p).unwrap();
        let star = argos_estimate(&ms, &pilots, &p, C64::new(1.0, 0.0)).unwrap();
        // telescoping product of adjacent ratios
        let mut oracle = CVec::from_element(7, C64::new(1.0, 0.0));
        for i in 1..7 {
            let up = ms.get(i, i - 1).unwrap()[(0, 0)] / pilots.get(i)[(0, 0)];
            let down = ms.get(i - 1, i).unwrap()[(0, 0)] / pilots.get(i - 1)[(0, 0)];
            oracle[i] = oracle[i - 1] * up / down;
        }
        assert!((&chain.f - &oracle).norm() < 1e-10);
        assert!((&chain.f - &star.f).norm() < 1e-10);
        assert!((&chain.f - calibration_vector(&imp).unwrap().f).norm() < 1e-10);
    }

    #[test]
    fn non_diagonal_pilot_rejected() {
        let mut r = ChaCha8Rng::seed_from_u64(6);
        let p = AntennaPartition::single_shot(vec![1, 3]).unwrap();
        let pilots = default_pilots(&p, PilotKind::AllOnes, &mut r).unwrap();
        let ms = MeasurementSet::new(0.0, 0);
        assert!(antenna_link(&ms, &pilots, &p, 2, 0).is_err());
    }
}
