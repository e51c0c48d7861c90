use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use otacal::airlink::{default_pilots, simulate_exchange, PilotKind, Snr, SnrConvention};
use otacal::estimators::{ls_estimate, mse, Constraint};
use otacal::grouping::pair_count;
use otacal::linalg;
use otacal::model::{
    calibration_vector, gen_channel, gen_impairments, AntennaPartition, ChannelModel, ImpairmentConfig,
};
use otacal::stacking::{build_stacked, check_identifiability};
use otacal::{CVec, C64};

/// Random group sizes and pilot lengths, kept small.
fn partition() -> impl Strategy<Value = AntennaPartition> {
    prop::collection::vec((1usize..=4, 1usize..=3), 2..=6)
        .prop_map(|g| AntennaPartition::new(g.iter().map(|x| x.0).collect(), g.iter().map(|x| x.1).collect()).unwrap())
}

fn complex_vec(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CVec> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n)
        .prop_map(|v| CVec::from_iterator(v.len(), v.into_iter().map(|(a, b)| C64::new(a, b))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stacked_system_annihilates_the_true_vector(p in partition(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let imp = gen_impairments(&ImpairmentConfig { amplitude_spread: 0.4, fix_first_to_one: true }, p.m(), &mut rng).unwrap();
        let chan = gen_channel(p.m(), ChannelModel::IidRayleigh, None, &mut rng).unwrap();
        let pilots = default_pilots(&p, PilotKind::UnitPhaseRandom, &mut rng).unwrap();
        let f = calibration_vector(&imp).unwrap().f;
        let ms = simulate_exchange(&p, &pilots, &imp, &chan, Snr::Noiseless, SnrConvention::UnitChannel, &mut rng).unwrap();
        let sys = build_stacked(&ms, &pilots, &p).unwrap();

        let id = check_identifiability(&p, None);
        prop_assert_eq!(sys.rows(), id.rows);
        prop_assert_eq!(id.rows, pair_count(p.pilot_lengths()));
        prop_assert!((&sys.y_matrix * &f).norm() <= 1e-12 * sys.y_matrix.norm() * f.norm());

        // pilots beyond a group's antenna count only repeat equations
        let effective: Vec<usize> = (0..p.g()).map(|g| p.pilot_len(g).min(p.size(g))).collect();
        if pair_count(&effective) + 1 >= p.m() {
            prop_assert!(id.ok);
            // generic instances: rank M − 1 and exact recovery
            prop_assert_eq!(linalg::rank(&sys.y_matrix), p.m() - 1);
            let fcc = ls_estimate(&sys, &Constraint::Fcc).unwrap();
            prop_assert_eq!(fcc.f_hat.f[0], C64::new(1.0, 0.0));
            prop_assert!(mse(&fcc.f_hat.f, &f).unwrap() < 1e-18 * f.norm_squared());
            let npc = ls_estimate(&sys, &Constraint::npc(&f)).unwrap();
            prop_assert!(mse(&npc.f_hat.f, &f).unwrap() < 1e-18 * f.norm_squared());
        }
    }

    #[test]
    fn normalisation_meets_the_constraint(f in complex_vec(2..=12), seed in any::<u64>()) {
        prop_assume!(f.norm() > 1e-3 && f[0].norm() > 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = CVec::from_fn(f.len(), |_, _| otacal::model::complex_gaussian(&mut rng));
        prop_assume!(f.dotc(&reference).norm() > 1e-6);

        let fcc = Constraint::Fcc.normalize(&f).unwrap();
        prop_assert_eq!(fcc.f[0], C64::new(1.0, 0.0));

        let npc = Constraint::npc(&reference).normalize(&f).unwrap();
        prop_assert!((npc.f.norm_squared() - reference.norm_squared()).abs() < 1e-10 * reference.norm_squared());
        let ip = npc.f.dotc(&reference);
        prop_assert!(ip.im.abs() < 1e-10 * ip.norm() && ip.re > 0.0);

        // only the scale changes: the results stay collinear with f
        let ratio = fcc.f[1] / f[1];
        prop_assert!((&fcc.f - &f * ratio).norm() < 1e-9 * fcc.f.norm());
    }

    #[test]
    fn khatri_rao_vectorises_diagonal_sandwiches(a in 1usize..4, b in 1usize..4, k in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: usize, c: usize| otacal::CMat::from_fn(r, c, |_, _| otacal::model::complex_gaussian(&mut rng));
        let (x, y) = (draw(a, k), draw(k, b));
        let d: Vec<C64> = draw(k, 1).iter().copied().collect();
        let lhs = linalg::vec_of(&(&x * linalg::diag(&d) * &y));
        let rhs = linalg::khatri_rao(&y.transpose(), &x) * CVec::from_column_slice(&d);
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn pseudo_inverse_penrose_conditions(r in 1usize..7, c in 1usize..7, rank in 1usize..7, seed in any::<u64>()) {
        let rank = rank.min(r).min(c);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |r: usize, c: usize| otacal::CMat::from_fn(r, c, |_, _| otacal::model::complex_gaussian(&mut rng));
        let a = draw(r, rank) * draw(rank, c);
        let p = linalg::pinv(&a);
        let n = a.norm();
        prop_assert_eq!(linalg::rank(&a), rank);
        prop_assert!((&a * &p * &a - &a).norm() < 1e-10 * n);
        prop_assert!((&p * &a * &p - &p).norm() < 1e-10 * p.norm());
        prop_assert!((&a * &p - (&a * &p).adjoint()).norm() < 1e-10);
        let q = linalg::column_space(&a);
        prop_assert!((q.adjoint() * &q - linalg::identity(rank)).norm() < 1e-12);
    }
}
