//! Bidirectional pilot exchanges between antenna groups.
//!
//! Group `i` sends the `M_i x L_i` pilot block `P_i` while every other
//! active group listens; the block received by group `j` is
//! `Y_{i→j} = R_j C_{i→j} T_i P_i + N_{i→j}`. A group never hears itself.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::model::{
    complex_gaussian, compose_digital_channel, gen_channel, AntennaPartition, ChannelModel, ChannelRealization,
    GeometryConfig, RfImpairments,
};
use crate::{CMat, CalError, Result, C64};

/// One pilot matrix per group.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSet {
    pub blocks: Vec<CMat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotKind {
    /// Unit-modulus entries with uniform random phase.
    UnitPhaseRandom,
    /// A single column of ones per group (`L_i = 1`).
    AllOnes,
    /// `P_i = I`, requires `L_i = M_i`.
    Identity,
}

impl PilotSet {
    pub fn get(&self, group: usize) -> &CMat {
        &self.blocks[group]
    }

    /// Shapes match the partition and every block has full rank.
    pub fn validate(&self, partition: &AntennaPartition) -> Result<()> {
        if self.blocks.len() != partition.g() {
            return Err(CalError::invalid(format!("{} pilot blocks for {} groups", self.blocks.len(), partition.g())));
        }
        for (g, p) in self.blocks.iter().enumerate() {
            let want = (partition.size(g), partition.pilot_len(g));
            if p.shape() != want {
                return Err(CalError::invalid(format!("pilot of group {g} is {:?}, expected {:?}", p.shape(), want)));
            }
            if linalg::rank(p) < want.0.min(want.1) {
                return Err(CalError::invalid(format!("pilot of group {g} is rank deficient")));
            }
        }
        Ok(())
    }
}

pub fn default_pilots<R: Rng + ?Sized>(partition: &AntennaPartition, kind: PilotKind, rng: &mut R) -> Result<PilotSet> {
    let mut blocks = Vec::with_capacity(partition.g());
    for g in 0..partition.g() {
        let (m, l) = (partition.size(g), partition.pilot_len(g));
        let p = match kind {
            PilotKind::UnitPhaseRandom => CMat::from_fn(m, l, |_, _| C64::from_polar(1.0, rng.random_range(-PI..=PI))),
            PilotKind::AllOnes => {
                if l != 1 {
                    return Err(CalError::invalid(format!("all-ones pilots need L = 1, group {g} has L = {l}")));
                }
                CMat::from_element(m, 1, C64::new(1.0, 0.0))
            }
            PilotKind::Identity => {
                if l != m {
                    return Err(CalError::invalid(format!("identity pilots need L = M, group {g} has {m}x{l}")));
                }
                linalg::identity(m)
            }
        };
        blocks.push(p);
    }
    Ok(PilotSet { blocks })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Db(f64),
    /// No noise at all; used for exact-recovery checks.
    Noiseless,
}

/// How a nominal SNR maps to the per-entry noise variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrConvention {
    /// Unit-variance channel and unit-power pilots: `σ² = 1 / SNR`.
    UnitChannel,
    /// SNR measured at the receiver nearest to the transmitter, whose link
    /// has the given amplitude: `σ² = amplitude² / SNR`.
    NearestReceiver { amplitude: f64 },
}

impl SnrConvention {
    pub fn for_channel(model: ChannelModel, geometry: Option<&GeometryConfig>) -> Result<Self> {
        match model {
            ChannelModel::IidRayleigh => Ok(SnrConvention::UnitChannel),
            ChannelModel::Geometric => {
                let g = geometry.ok_or_else(|| CalError::invalid("geometric channel needs a geometry"))?;
                Ok(SnrConvention::NearestReceiver { amplitude: g.nearest_link_amplitude() })
            }
        }
    }

    /// Per-entry noise variance for an SNR.
    pub fn noise_variance(&self, snr: Snr) -> Result<f64> {
        let db = match snr {
            Snr::Noiseless => return Ok(0.0),
            Snr::Db(db) if db.is_finite() => db,
            Snr::Db(db) => return Err(CalError::invalid(format!("SNR must be finite, got {db}"))),
        };
        let lin = 10f64.powf(db / 10.0);
        Ok(match self {
            SnrConvention::UnitChannel => 1.0 / lin,
            SnrConvention::NearestReceiver { amplitude } => amplitude * amplitude / lin,
        })
    }
}

/// All received blocks of one coherence slot.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    /// `(tx group, rx group) → Y_{tx→rx}`.
    blocks: BTreeMap<(usize, usize), CMat>,
    pub noise_variance: f64,
    pub slot: usize,
}

impl MeasurementSet {
    pub fn new(noise_variance: f64, slot: usize) -> Self {
        MeasurementSet { blocks: BTreeMap::new(), noise_variance, slot }
    }

    pub fn insert(&mut self, tx: usize, rx: usize, y: CMat) {
        self.blocks.insert((tx, rx), y);
    }

    /// `Y_{tx→rx}`.
    pub fn get(&self, tx: usize, rx: usize) -> Option<&CMat> {
        self.blocks.get(&(tx, rx))
    }

    pub fn require(&self, tx: usize, rx: usize) -> Result<&CMat> {
        self.get(tx, rx).ok_or_else(|| CalError::invalid(format!("slot {}: missing block {tx}->{rx}", self.slot)))
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &CMat)> {
        self.blocks.iter()
    }

    /// Groups appearing in at least one block.
    pub fn active_groups(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.blocks.keys().flat_map(|&(a, b)| [a, b]).collect();
        set.into_iter().collect()
    }

    /// Pairs `i < j` for which both directions are present.
    pub fn complete_pairs(&self) -> Vec<(usize, usize)> {
        self.blocks.keys().filter(|&&(a, b)| a < b && self.blocks.contains_key(&(b, a))).copied().collect()
    }

    /// Keep only the blocks exchanged among `groups`.
    pub fn restrict(&self, groups: &[usize]) -> MeasurementSet {
        let blocks = self
            .blocks
            .iter()
            .filter(|(&(a, b), _)| groups.contains(&a) && groups.contains(&b))
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        MeasurementSet { blocks, noise_variance: self.noise_variance, slot: self.slot }
    }

    /// CSV dump, one `slot,noise_variance,tx,rx,row,col,re,im` record per
    /// received sample.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&(tx, rx), y) in &self.blocks {
            for col in 0..y.ncols() {
                for row in 0..y.nrows() {
                    let v = y[(row, col)];
                    let rec = SampleRecord {
                        slot: self.slot,
                        noise_variance: self.noise_variance,
                        tx,
                        rx,
                        row,
                        col,
                        re: v.re,
                        im: v.im,
                    };
                    out.serialize(rec).map_err(csv_error)?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<MeasurementSet> {
        let mut set = MeasurementSet::new(0.0, 0);
        let mut samples: Vec<SampleRecord> = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize::<SampleRecord>() {
            samples.push(rec.map_err(csv_error)?);
        }
        if let Some(first) = samples.first() {
            set.slot = first.slot;
            set.noise_variance = first.noise_variance;
        }
        let mut shapes: BTreeMap<(usize, usize), (usize, usize)> = BTreeMap::new();
        for s in &samples {
            let e = shapes.entry((s.tx, s.rx)).or_default();
            *e = (e.0.max(s.row + 1), e.1.max(s.col + 1));
        }
        for (&key, &(rows, cols)) in &shapes {
            set.insert(key.0, key.1, CMat::zeros(rows, cols));
        }
        for s in samples {
            if (s.slot, s.noise_variance) != (set.slot, set.noise_variance) {
                return Err(CalError::invalid("measurement csv mixes slots or noise variances"));
            }
            set.blocks.get_mut(&(s.tx, s.rx)).expect("block allocated above")[(s.row, s.col)] = C64::new(s.re, s.im);
        }
        Ok(set)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SampleRecord {
    slot: usize,
    noise_variance: f64,
    tx: usize,
    rx: usize,
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

fn csv_error(e: csv::Error) -> CalError {
    CalError::invalid(format!("measurement csv: {e}"))
}

fn check_dimensions(
    partition: &AntennaPartition,
    pilots: &PilotSet,
    imp: &RfImpairments,
    chan: &ChannelRealization,
) -> Result<()> {
    pilots.validate(partition)?;
    let m = partition.m();
    if imp.m() != m || chan.m() != m {
        return Err(CalError::invalid(format!(
            "partition has {m} antennas, impairments {} and channel {}",
            imp.m(),
            chan.m()
        )));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn exchange_among<R: Rng + ?Sized>(
    partition: &AntennaPartition,
    pilots: &PilotSet,
    imp: &RfImpairments,
    chan: &ChannelRealization,
    groups: &[usize],
    noise_variance: f64,
    slot: usize,
    rng: &mut R,
) -> Result<MeasurementSet> {
    let sigma = noise_variance.sqrt();
    let mut set = MeasurementSet::new(noise_variance, slot);
    let link = |tx: usize, rx: usize, rng: &mut R| -> Result<CMat> {
        let (rt, rr) = (partition.range(tx), partition.range(rx));
        let c = chan.block(rt.clone(), rr.clone());
        let h = compose_digital_channel(&imp.tx_gains[rt], &imp.rx_gains[rr], &c)?;
        let mut y = h * pilots.get(tx);
        if sigma > 0.0 {
            y.iter_mut().for_each(|v| *v += complex_gaussian(rng) * sigma);
        }
        Ok(y)
    };
    for (a, &i) in groups.iter().enumerate() {
        for &j in &groups[a + 1..] {
            let yij = link(i, j, rng)?;
            let yji = link(j, i, rng)?;
            set.insert(i, j, yij);
            set.insert(j, i, yji);
        }
    }
    Ok(set)
}

/// Every group transmits its pilots once within a single coherence slot.
pub fn simulate_exchange<R: Rng + ?Sized>(
    partition: &AntennaPartition,
    pilots: &PilotSet,
    imp: &RfImpairments,
    chan: &ChannelRealization,
    snr: Snr,
    convention: SnrConvention,
    rng: &mut R,
) -> Result<MeasurementSet> {
    check_dimensions(partition, pilots, imp, chan)?;
    let sigma2 = convention.noise_variance(snr)?;
    let all: Vec<usize> = (0..partition.g()).collect();
    exchange_among(partition, pilots, imp, chan, &all, sigma2, 0, rng)
}

/// Active-group subsets of a sequence of coherence slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoncoherentSchedule {
    slots: Vec<Vec<usize>>,
}

impl NoncoherentSchedule {
    pub fn new(slots: Vec<Vec<usize>>, groups: usize) -> Result<Self> {
        if slots.is_empty() {
            return Err(CalError::invalid("a schedule needs at least one slot"));
        }
        let mut seen = vec![false; groups];
        let mut clean = Vec::with_capacity(slots.len());
        for (t, slot) in slots.into_iter().enumerate() {
            let set: BTreeSet<usize> = slot.into_iter().collect();
            if set.len() < 2 {
                return Err(CalError::invalid(format!("slot {t} has fewer than two groups")));
            }
            if let Some(&bad) = set.iter().find(|&&g| g >= groups) {
                return Err(CalError::invalid(format!("slot {t} names group {bad}, only {groups} exist")));
            }
            set.iter().for_each(|&g| seen[g] = true);
            clean.push(set.into_iter().collect());
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(CalError::invalid(format!("group {g} never transmits")));
        }
        Ok(NoncoherentSchedule { slots: clean })
    }

    /// One slot with every group active.
    pub fn coherent(groups: usize) -> Result<Self> {
        Self::new(vec![(0..groups).collect()], groups)
    }

    /// One slot per unordered pair of groups.
    pub fn pairwise(groups: usize) -> Result<Self> {
        let slots = (0..groups).flat_map(|i| (i + 1..groups).map(move |j| vec![i, j])).collect();
        Self::new(slots, groups)
    }

    pub fn slots(&self) -> &[Vec<usize>] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Where the per-slot intra-array channel comes from.
#[derive(Debug, Clone, Copy)]
pub enum ChannelSource<'a> {
    /// Independent draw for every slot.
    Fresh { model: ChannelModel, geometry: Option<&'a GeometryConfig> },
    /// The same realization in every slot.
    Fixed(&'a ChannelRealization),
    /// One given realization per slot.
    PerSlot(&'a [ChannelRealization]),
}

/// Spread the exchange over several slots. Impairments are shared by all
/// slots; the channel is drawn per slot according to `source`. `pilots`
/// holds either one set shared by every slot or one set per slot.
#[allow(clippy::too_many_arguments)]
pub fn simulate_noncoherent<R: Rng + ?Sized>(
    partition: &AntennaPartition,
    schedule: &NoncoherentSchedule,
    pilots: &[PilotSet],
    imp: &RfImpairments,
    source: ChannelSource<'_>,
    snr: Snr,
    convention: SnrConvention,
    rng: &mut R,
) -> Result<Vec<MeasurementSet>> {
    if pilots.len() != 1 && pilots.len() != schedule.len() {
        return Err(CalError::invalid(format!("{} pilot sets for {} slots", pilots.len(), schedule.len())));
    }
    if let Some(bad) = schedule.slots().iter().flatten().find(|&&g| g >= partition.g()) {
        return Err(CalError::invalid(format!("schedule names group {bad} outside the partition")));
    }
    if let ChannelSource::PerSlot(c) = source {
        if c.len() != schedule.len() {
            return Err(CalError::invalid(format!("{} channels for {} slots", c.len(), schedule.len())));
        }
    }
    let sigma2 = convention.noise_variance(snr)?;
    let mut out = Vec::with_capacity(schedule.len());
    for (t, groups) in schedule.slots().iter().enumerate() {
        let p = if pilots.len() == 1 { &pilots[0] } else { &pilots[t] };
        let fresh;
        let chan = match source {
            ChannelSource::Fixed(c) => c,
            ChannelSource::PerSlot(c) => &c[t],
            ChannelSource::Fresh { model, geometry } => {
                fresh = gen_channel(partition.m(), model, geometry, rng)?;
                &fresh
            }
        };
        check_dimensions(partition, p, imp, chan)?;
        out.push(exchange_among(partition, p, imp, chan, groups, sigma2, t, rng)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag;
    use crate::model::{calibration_vector, gen_impairments, ImpairmentConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn pilot_kinds() {
        let p = AntennaPartition::new(vec![3, 2], vec![1, 1]).unwrap();
        let ones = default_pilots(&p, PilotKind::AllOnes, &mut rng(0)).unwrap();
        assert_eq!(ones.get(0), &CMat::from_element(3, 1, C64::new(1.0, 0.0)));

        let sq = AntennaPartition::new(vec![2, 2], vec![2, 2]).unwrap();
        let id = default_pilots(&sq, PilotKind::Identity, &mut rng(0)).unwrap();
        assert_eq!(id.get(1), &linalg::identity(2));
        assert!(default_pilots(&p, PilotKind::Identity, &mut rng(0)).is_err());
        assert!(default_pilots(&sq, PilotKind::AllOnes, &mut rng(0)).is_err());

        let q = AntennaPartition::new(vec![3, 2, 4], vec![2, 3, 1]).unwrap();
        let r = default_pilots(&q, PilotKind::UnitPhaseRandom, &mut rng(1)).unwrap();
        r.validate(&q).unwrap();
        assert!(r.blocks.iter().flat_map(|b| b.iter()).all(|v| (v.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn noiseless_identity_exchange_returns_channel_blocks() {
        let p = AntennaPartition::new(vec![2, 3], vec![2, 3]).unwrap();
        let pilots = default_pilots(&p, PilotKind::Identity, &mut rng(0)).unwrap();
        let chan = gen_channel(5, ChannelModel::IidRayleigh, None, &mut rng(1)).unwrap();
        let imp = RfImpairments::identity(5);
        let ms = simulate_exchange(&p, &pilots, &imp, &chan, Snr::Noiseless, SnrConvention::UnitChannel, &mut rng(2))
            .unwrap();
        assert_eq!(ms.get(0, 1).unwrap(), &chan.block(0..2, 2..5));
        assert_eq!(ms.get(1, 0).unwrap(), &chan.block(2..5, 0..2));
        assert_eq!(ms.get(0, 1).unwrap().shape(), (3, 2));
        assert!(ms.get(0, 0).is_none());
    }

    #[test]
    fn noiseless_pair_residual_vanishes() {
        // P_iᵀ F_i Y_{j→i} − Y_{i→j}ᵀ F_j P_j = 0
        let p = AntennaPartition::new(vec![2, 3, 1], vec![2, 1, 3]).unwrap();
        let mut r = rng(4);
        let cfg = ImpairmentConfig { amplitude_spread: 0.3, fix_first_to_one: false };
        let imp = gen_impairments(&cfg, 6, &mut r).unwrap();
        let chan = gen_channel(6, ChannelModel::IidRayleigh, None, &mut r).unwrap();
        let pilots = default_pilots(&p, PilotKind::UnitPhaseRandom, &mut r).unwrap();
        let ms =
            simulate_exchange(&p, &pilots, &imp, &chan, Snr::Noiseless, SnrConvention::UnitChannel, &mut r).unwrap();
        let f = calibration_vector(&imp).unwrap().f;
        for (i, j) in p.pairs() {
            let fi = diag(&f.as_slice()[p.range(i)]);
            let fj = diag(&f.as_slice()[p.range(j)]);
            let lhs = pilots.get(i).transpose() * fi * ms.get(j, i).unwrap();
            let rhs = ms.get(i, j).unwrap().transpose() * fj * pilots.get(j);
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn noise_has_requested_variance() {
        let p = AntennaPartition::singletons(4).unwrap();
        let pilots = default_pilots(&p, PilotKind::AllOnes, &mut rng(0)).unwrap();
        let chan = gen_channel(4, ChannelModel::IidRayleigh, None, &mut rng(1)).unwrap();
        let imp = RfImpairments::identity(4);
        let clean =
            simulate_exchange(&p, &pilots, &imp, &chan, Snr::Noiseless, SnrConvention::UnitChannel, &mut rng(0))
                .unwrap();
        let mut r = rng(3);
        let mut acc = 0.0;
        let mut n = 0usize;
        while n < 10_000 {
            let noisy =
                simulate_exchange(&p, &pilots, &imp, &chan, Snr::Db(10.0), SnrConvention::UnitChannel, &mut r).unwrap();
            for ((_, y), (_, y0)) in noisy.blocks().zip(clean.blocks()) {
                acc += (y - y0).norm_squared();
                n += y.len();
            }
        }
        let var = acc / n as f64;
        assert!((var - 0.1).abs() < 0.005, "variance {var}");
    }

    #[test]
    fn snr_conventions() {
        assert_eq!(SnrConvention::UnitChannel.noise_variance(Snr::Noiseless).unwrap(), 0.0);
        assert!((SnrConvention::UnitChannel.noise_variance(Snr::Db(20.0)).unwrap() - 0.01).abs() < 1e-15);
        let g = GeometryConfig { rows: 4, cols: 16, spacing_over_wavelength: 0.5 };
        let conv = SnrConvention::for_channel(ChannelModel::Geometric, Some(&g)).unwrap();
        let want = (1.0 / (2.0 * PI)).powi(2) / 100.0;
        assert!((conv.noise_variance(Snr::Db(20.0)).unwrap() - want).abs() < 1e-15);
        assert!(SnrConvention::UnitChannel.noise_variance(Snr::Db(f64::INFINITY)).is_err());
    }

    #[test]
    fn schedules() {
        let s = NoncoherentSchedule::pairwise(6).unwrap();
        assert_eq!(s.len(), 15);
        assert!(s.slots().iter().all(|t| t.len() == 2));
        assert!(NoncoherentSchedule::new(vec![vec![0]], 1).is_err());
        assert!(NoncoherentSchedule::new(vec![vec![0, 1]], 3).is_err());
        assert!(NoncoherentSchedule::new(vec![vec![0, 3]], 3).is_err());
        assert!(NoncoherentSchedule::new(vec![], 3).is_err());
    }

    #[test]
    fn single_slot_schedule_matches_coherent_exchange() {
        let p = AntennaPartition::new(vec![1, 2, 2], vec![1, 1, 2]).unwrap();
        let mut r = rng(8);
        let cfg = ImpairmentConfig { amplitude_spread: 0.1, fix_first_to_one: true };
        let imp = gen_impairments(&cfg, 5, &mut r).unwrap();
        let pilots = default_pilots(&p, PilotKind::UnitPhaseRandom, &mut r).unwrap();
        let sched = NoncoherentSchedule::coherent(3).unwrap();

        let mut r1 = rng(21);
        let slots = simulate_noncoherent(
            &p,
            &sched,
            std::slice::from_ref(&pilots),
            &imp,
            ChannelSource::Fresh { model: ChannelModel::IidRayleigh, geometry: None },
            Snr::Db(15.0),
            SnrConvention::UnitChannel,
            &mut r1,
        )
        .unwrap();
        let mut r2 = rng(21);
        let chan = gen_channel(5, ChannelModel::IidRayleigh, None, &mut r2).unwrap();
        let ms =
            simulate_exchange(&p, &pilots, &imp, &chan, Snr::Db(15.0), SnrConvention::UnitChannel, &mut r2).unwrap();
        assert_eq!(slots.len(), 1);
        assert_eq!(slots[0], ms);
    }

    #[test]
    fn fresh_channels_are_independent_across_slots() {
        let p = AntennaPartition::singletons(2).unwrap();
        let pilots = default_pilots(&p, PilotKind::AllOnes, &mut rng(0)).unwrap();
        let imp = RfImpairments::identity(2);
        let sched = NoncoherentSchedule::new(vec![vec![0, 1], vec![0, 1]], 2).unwrap();
        let mut r = rng(5);
        let (mut sab, mut saa, mut sbb) = (C64::new(0.0, 0.0), 0.0, 0.0);
        for _ in 0..1000 {
            let slots = simulate_noncoherent(
                &p,
                &sched,
                std::slice::from_ref(&pilots),
                &imp,
                ChannelSource::Fresh { model: ChannelModel::IidRayleigh, geometry: None },
                Snr::Noiseless,
                SnrConvention::UnitChannel,
                &mut r,
            )
            .unwrap();
            let a = slots[0].get(0, 1).unwrap()[(0, 0)];
            let b = slots[1].get(0, 1).unwrap()[(0, 0)];
            sab += a * b.conj();
            saa += a.norm_sqr();
            sbb += b.norm_sqr();
        }
        let rho = sab.norm() / (saa * sbb).sqrt();
        assert!(rho < 0.05, "correlation {rho}");
    }

    #[test]
    fn csv_round_trip() {
        let p = AntennaPartition::new(vec![1, 2], vec![1, 2]).unwrap();
        let mut r = rng(9);
        let pilots = default_pilots(&p, PilotKind::UnitPhaseRandom, &mut r).unwrap();
        let chan = gen_channel(3, ChannelModel::IidRayleigh, None, &mut r).unwrap();
        let imp = RfImpairments::identity(3);
        let ms = simulate_exchange(&p, &pilots, &imp, &chan, Snr::Db(5.0), SnrConvention::UnitChannel, &mut r).unwrap();
        let mut buf = Vec::new();
        ms.write_csv(&mut buf).unwrap();
        let back = MeasurementSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ms);
    }
}
