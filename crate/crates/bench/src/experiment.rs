//! Monte Carlo driver.
//!
//! Trial `t` draws everything from its own ChaCha stream (`seed`, stream
//! `t`), so results do not depend on thread count or scheduling. Trials run
//! in parallel and are reduced in trial order.

use std::time::Instant;

use otacal::airlink::{
    default_pilots, simulate_exchange, simulate_noncoherent, ChannelSource, MeasurementSet, PilotSet, Snr,
    SnrConvention,
};
use otacal::crb::{build_composites, crb_f, AuxSource, CrbKind};
use otacal::estimators::{
    aml_estimate, argos_estimate, avalanche_estimate, daisy_chain_estimate, ls_estimate, mse, rogalin_estimate,
    Constraint,
};
use otacal::model::{calibration_vector, gen_channel, gen_impairments, ChannelRealization};
use otacal::stacking::{build_stacked, build_stacked_noncoherent};
use otacal::{CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ConstraintKind, Estimator, ExperimentConfig, Resolved};
use crate::table::{ResultRow, ResultTable};
use crate::BenchError;

/// `inf` dB means a noiseless exchange.
fn snr_from(db: f64) -> Snr {
    if db == f64::INFINITY {
        Snr::Noiseless
    } else {
        Snr::Db(db)
    }
}

/// Stream reserved for the shared channel of `fixed_channel` runs.
const FIXED_CHANNEL_STREAM: u64 = u64::MAX;

/// What one trial produced, per SNR point and estimator (config order).
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: usize,
    /// True calibration vector in group-contiguous order, `f[0] = 1`.
    pub f_true: CVec,
    /// Trace of the constrained CRB at unit noise variance.
    pub crb_unit: Option<f64>,
    /// `estimates[snr][estimator]`: the normalised estimate or the error
    /// that made the trial skip.
    pub estimates: Vec<Vec<Result<CVec, String>>>,
    /// Seconds spent per `[snr][estimator]`; zero unless timing is enabled.
    pub seconds: Vec<Vec<f64>>,
}

impl TrialOutcome {
    pub fn squared_error(&self, snr: usize, estimator: usize) -> Option<f64> {
        self.estimates[snr][estimator].as_ref().ok().and_then(|f| mse(f, &self.f_true).ok())
    }
}

fn constraint_for(kind: ConstraintKind, f_true: &CVec) -> Constraint {
    match kind {
        ConstraintKind::Fcc => Constraint::Fcc,
        ConstraintKind::Npc => Constraint::npc(f_true),
    }
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    res: &'a Resolved,
    convention: SnrConvention,
    order: Vec<usize>,
    fixed_channel: Option<ChannelRealization>,
}

impl Ctx<'_> {
    fn channel(&self, rng: &mut ChaCha8Rng) -> Result<ChannelRealization, BenchError> {
        // drawn in physical order so geometry applies, then regrouped
        let c = gen_channel(self.cfg.m, self.res.channel, self.res.geometry.as_ref(), rng)?;
        Ok(c.permuted(&self.order))
    }

    fn estimate(
        &self,
        e: Estimator,
        slots: &[MeasurementSet],
        pilots: &PilotSet,
        constraint: &Constraint,
    ) -> otacal::Result<CVec> {
        let part = &self.res.scheme.partition;
        if let Some(schedule) = &self.res.schedule {
            let sys = build_stacked_noncoherent(slots, std::slice::from_ref(pilots), part, schedule)?;
            return Ok(ls_estimate(&sys, constraint)?.f_hat.f);
        }
        let ms = &slots[0];
        let one = C64::new(1.0, 0.0);
        let f = match e {
            Estimator::Ls => ls_estimate(&build_stacked(ms, pilots, part)?, constraint)?.f_hat.f,
            Estimator::Rogalin => rogalin_estimate(ms, pilots, part, constraint)?.f_hat.f,
            Estimator::Aml => aml_estimate(ms, pilots, part, &self.cfg.aml.options(), constraint)?.f_hat.f,
            Estimator::Argos => constraint.normalize(&argos_estimate(ms, pilots, part, one)?.f)?.f,
            Estimator::DaisyChain => constraint.normalize(&daisy_chain_estimate(ms, pilots, part)?.f)?.f,
            Estimator::Avalanche => constraint.normalize(&avalanche_estimate(ms, pilots, part)?.f)?.f,
        };
        Ok(f)
    }

    fn trial(&self, t: usize) -> Result<TrialOutcome, BenchError> {
        let cfg = self.cfg;
        let part = &self.res.scheme.partition;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64);

        // impairments are i.i.d. per antenna, so they are drawn directly in
        // group order (keeps f[0] = 1 at the first contiguous position)
        let imp = gen_impairments(&self.res.impairments, cfg.m, &mut rng)?;
        let f_true = calibration_vector(&imp)?.f;
        let pilots = default_pilots(part, self.res.pilots, &mut rng)?;
        let slots_len = self.res.schedule.as_ref().map_or(1, |s| s.len());
        let mut channels = Vec::with_capacity(slots_len);
        for _ in 0..slots_len {
            channels.push(match &self.fixed_channel {
                Some(c) => c.clone(),
                None => self.channel(&mut rng)?,
            });
        }
        let noise_seeds: Vec<u64> = cfg.snr_db.iter().map(|_| rng.random()).collect();

        let crb_unit = if cfg.crb && self.res.schedule.is_none() {
            let kind = match cfg.constraint {
                ConstraintKind::Fcc => CrbKind::Fcc,
                ConstraintKind::Npc => CrbKind::Npc,
            };
            let ctx =
                build_composites(&f_true, AuxSource::Physical { imp: &imp, chan: &channels[0] }, &pilots, part, 1.0)?;
            crb_f(&ctx, kind).ok().map(|c| c.trace)
        } else {
            None
        };

        let constraint = constraint_for(cfg.constraint, &f_true);
        let mut estimates = Vec::with_capacity(cfg.snr_db.len());
        let mut seconds = Vec::with_capacity(cfg.snr_db.len());
        for (&snr, &seed) in cfg.snr_db.iter().zip(&noise_seeds) {
            let mut noise = ChaCha8Rng::seed_from_u64(seed);
            let snr = snr_from(snr);
            let slots = match &self.res.schedule {
                None => vec![simulate_exchange(part, &pilots, &imp, &channels[0], snr, self.convention, &mut noise)?],
                Some(s) => simulate_noncoherent(
                    part,
                    s,
                    std::slice::from_ref(&pilots),
                    &imp,
                    ChannelSource::PerSlot(&channels),
                    snr,
                    self.convention,
                    &mut noise,
                )?,
            };
            let mut row = Vec::with_capacity(cfg.estimators.len());
            let mut time = Vec::with_capacity(cfg.estimators.len());
            for &e in &cfg.estimators {
                let start = Instant::now();
                row.push(self.estimate(e, &slots, &pilots, &constraint).map_err(|err| err.to_string()));
                time.push(if cfg.timing { start.elapsed().as_secs_f64() } else { 0.0 });
            }
            estimates.push(row);
            seconds.push(time);
        }
        Ok(TrialOutcome { trial: t, f_true, crb_unit, estimates, seconds })
    }
}

/// Run every trial and return the raw per-trial outcomes (trial order).
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialOutcome>, BenchError> {
    let res = cfg.resolve()?;
    let convention = SnrConvention::for_channel(res.channel, res.geometry.as_ref())?;
    let order = res.scheme.order();
    let mut ctx = Ctx { cfg, res: &res, convention, order, fixed_channel: None };
    if cfg.fixed_channel {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(FIXED_CHANNEL_STREAM);
        ctx.fixed_channel = Some(ctx.channel(&mut rng)?);
    }
    (0..cfg.trials).into_par_iter().map(|t| ctx.trial(t)).collect()
}

/// Average the outcomes into one row per (estimator, SNR).
pub fn summarize(cfg: &ExperimentConfig, outcomes: &[TrialOutcome]) -> Result<ResultTable, BenchError> {
    let res = cfg.resolve()?;
    let convention = SnrConvention::for_channel(res.channel, res.geometry.as_ref())?;
    let mut rows = Vec::new();
    for (e_idx, &e) in cfg.estimators.iter().enumerate() {
        for (s_idx, &snr) in cfg.snr_db.iter().enumerate() {
            let sigma2 = convention.noise_variance(snr_from(snr))?;
            let errors: Vec<f64> = outcomes.iter().filter_map(|o| o.squared_error(s_idx, e_idx)).collect();
            let crbs: Vec<f64> = outcomes.iter().filter_map(|o| o.crb_unit).collect();
            let used = errors.len();
            rows.push(ResultRow {
                estimator: e.name().to_string(),
                constraint: cfg.constraint.name().to_string(),
                snr_db: snr,
                mse: if used > 0 { errors.iter().sum::<f64>() / used as f64 } else { f64::NAN },
                crb_trace: (!crbs.is_empty()).then(|| sigma2 * crbs.iter().sum::<f64>() / crbs.len() as f64),
                trials: used,
                wall_time: outcomes.iter().map(|o| o.seconds[s_idx][e_idx]).sum(),
                skipped: outcomes.len() - used,
            });
        }
    }
    Ok(ResultTable { rows })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultTable, BenchError> {
    let outcomes = run_trials(cfg)?;
    summarize(cfg, &outcomes)
}

/// CRB-only sweep: the averaged bound per SNR, no estimation.
pub fn crb_sweep(cfg: &ExperimentConfig) -> Result<ResultTable, BenchError> {
    let mut c = cfg.clone();
    c.crb = true;
    let res = c.resolve()?;
    if res.schedule.is_some() {
        return Err(BenchError::Config("the CRB is only available for coherent exchanges".into()));
    }
    let convention = SnrConvention::for_channel(res.channel, res.geometry.as_ref())?;
    let order = res.scheme.order();
    let part = &res.scheme.partition;
    let kind = match c.constraint {
        ConstraintKind::Fcc => CrbKind::Fcc,
        ConstraintKind::Npc => CrbKind::Npc,
    };
    let ctx = Ctx { cfg: &c, res: &res, convention, order, fixed_channel: None };
    let fixed = if c.fixed_channel {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        rng.set_stream(FIXED_CHANNEL_STREAM);
        Some(ctx.channel(&mut rng)?)
    } else {
        None
    };
    let traces: Vec<Option<f64>> = (0..c.trials)
        .into_par_iter()
        .map(|t| -> Result<Option<f64>, BenchError> {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            rng.set_stream(t as u64);
            let imp = gen_impairments(&res.impairments, c.m, &mut rng)?;
            let f = calibration_vector(&imp)?.f;
            let pilots = default_pilots(part, res.pilots, &mut rng)?;
            let chan = match &fixed {
                Some(ch) => ch.clone(),
                None => ctx.channel(&mut rng)?,
            };
            let comp = build_composites(&f, AuxSource::Physical { imp: &imp, chan: &chan }, &pilots, part, 1.0)?;
            Ok(crb_f(&comp, kind).ok().map(|r| r.trace))
        })
        .collect::<Result<_, _>>()?;
    let ok: Vec<f64> = traces.iter().flatten().copied().collect();
    let mut rows = Vec::new();
    for &snr in &c.snr_db {
        let sigma2 = convention.noise_variance(snr_from(snr))?;
        rows.push(ResultRow {
            estimator: "CRB".into(),
            constraint: c.constraint.name().into(),
            snr_db: snr,
            mse: f64::NAN,
            crb_trace: (!ok.is_empty()).then(|| sigma2 * ok.iter().sum::<f64>() / ok.len() as f64),
            trials: ok.len(),
            wall_time: 0.0,
            skipped: traces.len() - ok.len(),
        });
    }
    Ok(ResultTable { rows })
}
