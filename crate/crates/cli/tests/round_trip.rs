use fractalfn::config::{
    parse_config, print_config, Builder, IfsSpec, JobConfig, MapSpec, Mode, PartitionKind, PieceSpec, ScaleSpec, Start,
    SystemSpec,
};
use fractalfn_core::analysis::NormKind;
use proptest::prelude::*;

fn norm() -> impl Strategy<Value = NormKind> {
    prop_oneof![
        Just(NormKind::Sup),
        (0.1f64..5.0).prop_map(NormKind::Lp),
        Just(NormKind::Lp(f64::INFINITY)),
        (0.01f64..0.99).prop_map(NormKind::Holder),
        (0usize..4).prop_map(NormKind::Cn),
        (0usize..3, 1.0f64..4.0).prop_map(|(m, p)| NormKind::Sobolev { m, p }),
    ]
}

fn scale() -> impl Strategy<Value = ScaleSpec> {
    prop_oneof![
        (-0.9f64..0.9).prop_map(|c| ScaleSpec::Poly(vec![c])),
        (3usize..8, -0.95f64..0.95).prop_map(|(order, amplitude)| ScaleSpec::Bspline { order, amplitude }),
    ]
}

fn binary_system() -> impl Strategy<Value = SystemSpec> {
    (1usize..4)
        .prop_flat_map(|half| {
            let n = 2 * half;
            (
                Just(n),
                prop::collection::vec((prop::collection::vec(-3.0f64..3.0, 1..4), scale()), n),
                prop::option::of(prop::collection::vec(-2.0f64..2.0, half + 1)),
            )
        })
        .prop_map(|(n, pieces, data)| SystemSpec {
            partition: PartitionKind::Binary,
            n,
            builder: Builder::None,
            knots: None,
            data,
            midpoints: None,
            pieces: pieces
                .into_iter()
                .map(|(l, s)| PieceSpec {
                    subset: None,
                    lambda: Some(l),
                    scale: Some(s),
                })
                .collect(),
        })
}

fn affine_fif_system() -> impl Strategy<Value = SystemSpec> {
    (1usize..4)
        .prop_flat_map(|half| {
            (
                prop::collection::vec(-0.9f64..0.9, 2 * half),
                prop::collection::vec(-2.0f64..2.0, half + 1),
                prop::option::of(prop::collection::vec(-2.0f64..2.0, half)),
            )
        })
        .prop_map(|(s, data, midpoints)| SystemSpec {
            partition: PartitionKind::Binary,
            n: s.len(),
            builder: Builder::AffineFif,
            knots: None,
            data: Some(data),
            midpoints,
            pieces: s
                .into_iter()
                .map(|c| PieceSpec {
                    subset: None,
                    lambda: None,
                    scale: Some(ScaleSpec::Poly(vec![c])),
                })
                .collect(),
        })
}

fn general_system() -> impl Strategy<Value = SystemSpec> {
    (1usize..5)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(0.05f64..1.0, n),
                prop::collection::vec((0.0f64..0.45, 0.55f64..1.0, scale()), n),
                prop::collection::vec(-2.0f64..2.0, n + 1),
            )
        })
        .prop_map(|(gaps, pieces, data)| {
            let total: f64 = gaps.iter().sum();
            let mut knots = vec![0.0];
            let mut acc = 0.0;
            for g in &gaps[..gaps.len() - 1] {
                acc += g / total;
                knots.push(acc);
            }
            knots.push(1.0);
            SystemSpec {
                partition: PartitionKind::General,
                n: gaps.len(),
                builder: Builder::PropertyS,
                knots: Some(knots),
                data: Some(data),
                midpoints: None,
                pieces: pieces
                    .into_iter()
                    .map(|(a, b, s)| PieceSpec {
                        subset: Some((a, b)),
                        lambda: None,
                        scale: Some(s),
                    })
                    .collect(),
            }
        })
}

fn system() -> impl Strategy<Value = SystemSpec> {
    prop_oneof![binary_system(), affine_fif_system(), general_system()]
}

fn ifs() -> impl Strategy<Value = IfsSpec> {
    prop::collection::vec(
        (
            (0.0f64..0.5, 0.5f64..1.0, 0.0f64..0.5, 0.5f64..1.0),
            prop::array::uniform4(-1.0f64..1.0),
            prop::array::uniform2(-1.0f64..1.0),
        ),
        1..4,
    )
    .prop_map(|maps| IfsSpec {
        bounds: [0.0, 1.0, 0.0, 1.0],
        maps: maps
            .into_iter()
            .map(|((x0, x1, y0, y1), linear, translation)| MapSpec {
                domain: [x0, x1, y0, y1],
                linear,
                translation,
            })
            .collect(),
    })
}

fn job() -> impl Strategy<Value = JobConfig> {
    let common = (
        2usize..10_000,
        0.0f64..1e-3,
        1usize..1000,
        1e-4f64..0.5,
        any::<u64>(),
        prop_oneof![Just(Start::Zero), Just(Start::Random)],
        prop::collection::vec(norm(), 0..4),
        prop::collection::vec(norm(), 0..3),
    );
    let shape = prop_oneof![
        (
            prop_oneof![Just(Mode::Solve), Just(Mode::Check), Just(Mode::GraphIfs)],
            system(),
            prop::option::of(ifs())
        )
            .prop_map(|(m, s, f)| (m, Some(s), None, f)),
        (system(), system()).prop_map(|(a, b)| (Mode::Tensor, Some(a), Some(b), None)),
        (prop_oneof![Just(Mode::Attract), Just(Mode::GlobalAttract)], ifs()).prop_map(|(m, f)| (
            m,
            None,
            None,
            Some(f)
        )),
    ];
    (common, shape).prop_map(
        |((grid, tol, max_iter, resolution, seed, start, checks, norms), (mode, system, second, ifs))| JobConfig {
            mode,
            grid,
            tol,
            max_iter,
            resolution,
            seed,
            start,
            checks,
            norms,
            system,
            second,
            ifs,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_then_parse_is_identity(cfg in job()) {
        let text = print_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn printing_is_stable(cfg in job()) {
        let once = print_config(&cfg);
        let twice = print_config(&parse_config(&once).unwrap());
        prop_assert_eq!(once, twice);
    }
}
