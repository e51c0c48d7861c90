//! Domain types and random generation of front-end impairments and
//! intra-array channels.

use std::f64::consts::PI;
use std::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::{CMat, CVec, CalError, Result, C64};

/// Partition of `M` antennas into `G ≥ 2` contiguous groups, each with its
/// own pilot length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AntennaPartition {
    group_sizes: Vec<usize>,
    pilot_lengths: Vec<usize>,
}

impl AntennaPartition {
    pub fn new(group_sizes: Vec<usize>, pilot_lengths: Vec<usize>) -> Result<Self> {
        if group_sizes.len() != pilot_lengths.len() {
            return Err(CalError::invalid(format!(
                "{} group sizes but {} pilot lengths",
                group_sizes.len(),
                pilot_lengths.len()
            )));
        }
        if group_sizes.len() < 2 {
            return Err(CalError::invalid("a partition needs at least two groups"));
        }
        if group_sizes.iter().chain(&pilot_lengths).any(|&n| n == 0) {
            return Err(CalError::invalid("group sizes and pilot lengths must be positive"));
        }
        Ok(AntennaPartition { group_sizes, pilot_lengths })
    }

    /// Every group transmits a single pilot symbol.
    pub fn single_shot(group_sizes: Vec<usize>) -> Result<Self> {
        let l = vec![1; group_sizes.len()];
        Self::new(group_sizes, l)
    }

    /// `m` single-antenna groups with one pilot each.
    pub fn singletons(m: usize) -> Result<Self> {
        Self::single_shot(vec![1; m])
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn pilot_lengths(&self) -> &[usize] {
        &self.pilot_lengths
    }

    /// Total number of antennas.
    pub fn m(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    /// Number of groups.
    pub fn g(&self) -> usize {
        self.group_sizes.len()
    }

    /// Total channel uses `K = Σ L_i`.
    pub fn channel_uses(&self) -> usize {
        self.pilot_lengths.iter().sum()
    }

    pub fn size(&self, group: usize) -> usize {
        self.group_sizes[group]
    }

    pub fn pilot_len(&self, group: usize) -> usize {
        self.pilot_lengths[group]
    }

    pub fn offset(&self, group: usize) -> usize {
        self.group_sizes[..group].iter().sum()
    }

    /// Antenna indices of a group.
    pub fn range(&self, group: usize) -> Range<usize> {
        let o = self.offset(group);
        o..o + self.group_sizes[group]
    }

    pub fn group_of(&self, antenna: usize) -> Option<usize> {
        (0..self.g()).find(|&g| self.range(g).contains(&antenna))
    }

    /// Unordered group pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let g = self.g();
        (0..g).flat_map(move |i| (i + 1..g).map(move |j| (i, j)))
    }
}

/// Diagonal transmit and receive front-end responses.
#[derive(Debug, Clone, PartialEq)]
pub struct RfImpairments {
    pub tx_gains: Vec<C64>,
    pub rx_gains: Vec<C64>,
}

impl RfImpairments {
    pub fn new(tx_gains: Vec<C64>, rx_gains: Vec<C64>) -> Result<Self> {
        if tx_gains.len() != rx_gains.len() {
            return Err(CalError::invalid("tx and rx gain vectors differ in length"));
        }
        if tx_gains.iter().chain(&rx_gains).any(|g| g.norm() == 0.0 || !g.is_finite()) {
            return Err(CalError::invalid("front-end gains must be finite and nonzero"));
        }
        Ok(RfImpairments { tx_gains, rx_gains })
    }

    /// Ideal front-ends, `T = R = I`.
    pub fn identity(m: usize) -> Self {
        RfImpairments { tx_gains: vec![C64::new(1.0, 0.0); m], rx_gains: vec![C64::new(1.0, 0.0); m] }
    }

    pub fn m(&self) -> usize {
        self.tx_gains.len()
    }

    /// Restrict to a contiguous antenna range.
    pub fn slice(&self, r: Range<usize>) -> RfImpairments {
        RfImpairments { tx_gains: self.tx_gains[r.clone()].to_vec(), rx_gains: self.rx_gains[r].to_vec() }
    }

    /// Reorder antennas: entry `k` of the result is antenna `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> RfImpairments {
        RfImpairments {
            tx_gains: order.iter().map(|&a| self.tx_gains[a]).collect(),
            rx_gains: order.iter().map(|&a| self.rx_gains[a]).collect(),
        }
    }
}

/// Scale-fixing convention a calibration vector is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    /// First coefficient equals one.
    Fcc,
    /// Fixed norm with the phase aligned to a reference vector.
    Npc,
    UnitNorm,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationVector {
    pub f: CVec,
    pub constraint: ConstraintTag,
}

impl CalibrationVector {
    pub fn new(f: CVec, constraint: ConstraintTag) -> Self {
        CalibrationVector { f, constraint }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// Check the constraint invariant. `declared_norm` is required for
    /// `Npc` and defaults to one for `UnitNorm`.
    pub fn satisfies_constraint(&self, declared_norm: Option<f64>) -> bool {
        match self.constraint {
            ConstraintTag::Fcc => !self.f.is_empty() && self.f[0] == C64::new(1.0, 0.0),
            ConstraintTag::Npc | ConstraintTag::UnitNorm => {
                let target = declared_norm.unwrap_or(1.0);
                ((self.f.norm() - target) / target).abs() <= 1e-12
            }
            ConstraintTag::None => true,
        }
    }
}

/// Per-antenna calibration coefficients `f_m = t_m / r_m`, the diagonal of
/// `R^{-T} T`.
pub fn calibration_vector(imp: &RfImpairments) -> Result<CalibrationVector> {
    let mut f = CVec::zeros(imp.m());
    for (k, (t, r)) in imp.tx_gains.iter().zip(&imp.rx_gains).enumerate() {
        if r.norm() == 0.0 {
            return Err(CalError::DivisionDomain(format!("rx gain of antenna {k} is zero")));
        }
        f[k] = t / r;
    }
    Ok(CalibrationVector::new(f, ConstraintTag::None))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentConfig {
    /// Amplitude spread δ: gains have amplitude uniform in `[1−δ, 1+δ]`.
    pub amplitude_spread: f64,
    /// Force `f[0] = 1` for the true calibration vector.
    pub fix_first_to_one: bool,
}

impl ImpairmentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.amplitude_spread) {
            return Err(CalError::invalid(format!(
                "amplitude spread must lie in [0, 1), got {}",
                self.amplitude_spread
            )));
        }
        Ok(())
    }
}

fn unit_phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(-PI..=PI))
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Random front-end gains: amplitude uniform in `[1−δ, 1+δ]`, phase uniform
/// in `[−π, π]`.
pub fn gen_impairments<R: Rng + ?Sized>(config: &ImpairmentConfig, m: usize, rng: &mut R) -> Result<RfImpairments> {
    config.validate()?;
    if m < 2 {
        return Err(CalError::invalid(format!("need at least two antennas, got {m}")));
    }
    let d = config.amplitude_spread;
    let mut draw = || C64::from_polar(rng.random_range((1.0 - d)..=(1.0 + d)), 0.0) * unit_phase(rng);
    let mut tx: Vec<C64> = Vec::with_capacity(m);
    let mut rx: Vec<C64> = Vec::with_capacity(m);
    for _ in 0..m {
        tx.push(draw());
        rx.push(draw());
    }
    if config.fix_first_to_one {
        // t0 = r0 = sqrt(t0 r0): geometric-mean amplitude stays in range
        let g = (tx[0] * rx[0]).sqrt();
        tx[0] = g;
        rx[0] = g;
    }
    RfImpairments::new(tx, rx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    IidRayleigh,
    Geometric,
}

/// Planar grid of antennas; antenna `r * cols + c` sits at row `r`, column
/// `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    /// Element spacing in wavelengths, `d / λ`.
    pub spacing_over_wavelength: f64,
}

impl GeometryConfig {
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.rows * self.cols != m {
            return Err(CalError::invalid(format!("grid {}x{} does not hold {m} antennas", self.rows, self.cols)));
        }
        if self.spacing_over_wavelength.is_nan() || self.spacing_over_wavelength <= 0.0 {
            return Err(CalError::invalid("element spacing must be positive"));
        }
        Ok(())
    }

    pub fn position(&self, antenna: usize) -> (usize, usize) {
        (antenna / self.cols, antenna % self.cols)
    }

    /// Distance in wavelengths between two antennas.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let (ra, ca) = self.position(a);
        let (rb, cb) = self.position(b);
        let dr = ra as f64 - rb as f64;
        let dc = ca as f64 - cb as f64;
        dr.hypot(dc) * self.spacing_over_wavelength
    }

    /// Free-space amplitude `λ / (4π d)` for a distance given in wavelengths.
    pub fn link_amplitude(distance_over_wavelength: f64) -> f64 {
        1.0 / (4.0 * PI * distance_over_wavelength)
    }

    /// Amplitude of the strongest (nearest-neighbour) link.
    pub fn nearest_link_amplitude(&self) -> f64 {
        Self::link_amplitude(self.spacing_over_wavelength)
    }
}

/// Symmetric intra-array propagation matrix; entry `[rx, tx]`. The diagonal
/// is unused and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub c: CMat,
    pub model: ChannelModel,
}

impl ChannelRealization {
    pub fn m(&self) -> usize {
        self.c.nrows()
    }

    /// `C_{i→j}`: rows are receivers in `rx`, columns transmitters in `tx`.
    pub fn block(&self, tx: Range<usize>, rx: Range<usize>) -> CMat {
        self.c.view((rx.start, tx.start), (rx.len(), tx.len())).into_owned()
    }

    /// Reorder antennas: index `k` of the result is antenna `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> ChannelRealization {
        let n = order.len();
        ChannelRealization { c: CMat::from_fn(n, n, |r, c| self.c[(order[r], order[c])]), model: self.model }
    }

    pub fn is_symmetric(&self) -> bool {
        self.c == self.c.transpose()
    }
}

/// Draw an intra-array channel. Entries above the diagonal are drawn and
/// mirrored, so the result is exactly symmetric.
pub fn gen_channel<R: Rng + ?Sized>(
    m: usize,
    model: ChannelModel,
    geometry: Option<&GeometryConfig>,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if m < 2 {
        return Err(CalError::invalid(format!("need at least two antennas, got {m}")));
    }
    let geom = match model {
        ChannelModel::Geometric => {
            let g = geometry.ok_or_else(|| CalError::invalid("geometric channel needs a geometry"))?;
            g.validate(m)?;
            Some(g)
        }
        ChannelModel::IidRayleigh => None,
    };
    let mut c = CMat::zeros(m, m);
    for i in 0..m {
        for j in i + 1..m {
            let v = match geom {
                None => complex_gaussian(rng),
                Some(g) => GeometryConfig::link_amplitude(g.distance(i, j)) * unit_phase(rng),
            };
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    Ok(ChannelRealization { c, model })
}

/// Digital channel `R_B C T_A` seen from transmitter side A to receiver side
/// B, with diagonal front-ends.
pub fn compose_digital_channel(tx_side: &[C64], rx_side: &[C64], c: &CMat) -> Result<CMat> {
    if c.nrows() != rx_side.len() || c.ncols() != tx_side.len() {
        return Err(CalError::invalid(format!(
            "channel block is {}x{}, front-ends are rx {} / tx {}",
            c.nrows(),
            c.ncols(),
            rx_side.len(),
            tx_side.len()
        )));
    }
    Ok(CMat::from_fn(c.nrows(), c.ncols(), |r, k| rx_side[r] * c[(r, k)] * tx_side[k]))
}
