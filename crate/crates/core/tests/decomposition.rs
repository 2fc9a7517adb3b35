mod common;

use pgmatroid::decomp::{
    conditions_at, counting_bound_report, find_violating_partial_transversal,
    naive_transversal_oracle, search_decomposition, threshold_n0, verify_decomposition,
    DecompositionFile, LogBase, Verdict,
};
use pgmatroid::randmodel::trial_rng;
use pgmatroid::{colouring_number, GeometryCtx, Limits, SubMatroid};
use rand::seq::SliceRandom;
use rand::Rng;

use common::{all_subsets_edmonds, oracle_rank};

/// Every full transversal has colouring number at most b, by exhaustive product.
fn transversals_ok(m: &SubMatroid, classes: &[Vec<usize>], b: usize) -> bool {
    let mut choice = vec![0usize; classes.len()];
    loop {
        let y: Vec<usize> = classes.iter().zip(&choice).map(|(c, &i)| c[i]).collect();
        let sub = SubMatroid::restrict(m.ctx(), &y).unwrap();
        if all_subsets_edmonds(&sub) > b {
            return false;
        }
        let mut pos = 0;
        loop {
            if pos == classes.len() {
                return true;
            }
            choice[pos] += 1;
            if choice[pos] < classes[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

fn random_instance<R: Rng>(
    ctx: &std::sync::Arc<GeometryCtx>,
    rng: &mut R,
) -> (SubMatroid, Vec<Vec<usize>>) {
    let mut points: Vec<usize> = (0..ctx.point_count()).collect();
    points.shuffle(rng);
    let classes_n = rng.random_range(1..=6);
    let mut classes = Vec::new();
    let mut it = points.into_iter();
    for _ in 0..classes_n {
        let size = rng.random_range(1..=3);
        classes.push(it.by_ref().take(size).collect::<Vec<_>>());
    }
    let ground: Vec<usize> = classes.iter().flatten().copied().collect();
    (SubMatroid::restrict(ctx, &ground).unwrap(), classes)
}

#[test]
fn partial_transversal_search_matches_oracles() {
    let ctx = GeometryCtx::pg(4, 2).unwrap();
    let limits = Limits::default();
    let mut violations = 0;
    for t in 0..150 {
        let mut rng = trial_rng(99, t);
        let (m, classes) = random_instance(&ctx, &mut rng);
        let b = rng.random_range(1..=2);
        let found = find_violating_partial_transversal(&m, &classes, b, u64::MAX).unwrap();
        let naive = naive_transversal_oracle(&m, &classes, b, &limits).unwrap();
        assert_eq!(found.is_none(), naive, "instance {t}");
        assert_eq!(naive, transversals_ok(&m, &classes, b), "instance {t}");
        if let Some(x) = found {
            violations += 1;
            assert!(x.len() > b * oracle_rank(&ctx, &x));
            for class in &classes {
                assert!(x.iter().filter(|e| class.contains(e)).count() <= 1);
            }
        }
    }
    // Both outcomes occur.
    assert!(violations > 10 && violations < 140, "{violations}");
}

/// Set partitions of `items` with blocks of size at most `cap`.
fn partitions(
    items: &[usize],
    cap: usize,
    acc: &mut Vec<Vec<usize>>,
    out: &mut Vec<Vec<Vec<usize>>>,
) {
    let Some((&first, rest)) = items.split_first() else {
        out.push(acc.clone());
        return;
    };
    for i in 0..acc.len() {
        if acc[i].len() < cap {
            acc[i].push(first);
            partitions(rest, cap, acc, out);
            acc[i].pop();
        }
    }
    acc.push(vec![first]);
    partitions(rest, cap, acc, out);
    acc.pop();
}

#[test]
fn search_agrees_with_exhaustive_partitions() {
    let ctx = GeometryCtx::pg(4, 2).unwrap();
    let limits = Limits::default();
    let mut found_some = 0;
    for t in 0..60 {
        let mut rng = trial_rng(7, t);
        let mut pts: Vec<usize> = (0..15).collect();
        pts.shuffle(&mut rng);
        pts.truncate(rng.random_range(1..=7));
        let m = SubMatroid::restrict(&ctx, &pts).unwrap();
        let b = rng.random_range(1..=2);
        let c = [1.0, 1.5, 2.0][rng.random_range(0..3)];
        let k = colouring_number(&m).0;
        let cap = (c * k as f64).floor() as usize;
        let mut all = Vec::new();
        partitions(m.elements(), cap, &mut Vec::new(), &mut all);
        let exists = all.iter().any(|p| transversals_ok(&m, p, b));
        let got = search_decomposition(&m, b, c, u64::MAX, &limits).unwrap();
        assert_eq!(got.is_some(), exists, "instance {t}: {pts:?} b={b} c={c}");
        if let Some(d) = got {
            found_some += 1;
            assert_eq!(
                verify_decomposition(&m, &d.classes, b, c, u64::MAX).unwrap(),
                Verdict::Valid
            );
            assert!(transversals_ok(&m, &d.classes, b));
        }
    }
    assert!(found_some > 0);

    // The Fano plane has no (1,1)-decomposition.
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2).unwrap());
    let mut all = Vec::new();
    partitions(fano.elements(), 3, &mut Vec::new(), &mut all);
    assert!(!all.iter().any(|p| transversals_ok(&fano, p, 1)));
    assert!(search_decomposition(&fano, 1, 1.0, u64::MAX, &limits)
        .unwrap()
        .is_none());
}

#[test]
fn worked_fano_examples() {
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2).unwrap());
    let singletons: Vec<Vec<usize>> = (0..7).map(|i| vec![i]).collect();
    match verify_decomposition(&fano, &singletons, 2, 1.0, u64::MAX).unwrap() {
        Verdict::TransversalViolation { witness, rank } => {
            assert_eq!((witness.len(), rank), (7, 3))
        }
        other => panic!("{other:?}"),
    }
    assert!(verify_decomposition(&fano, &singletons, 3, 1.0, u64::MAX)
        .unwrap()
        .is_valid());
    let d = search_decomposition(&fano, 1, 2.0, u64::MAX, &Limits::default())
        .unwrap()
        .unwrap();
    assert!(d.classes.iter().all(|c| c.len() <= 6));
    assert!(transversals_ok(&fano, &d.classes, 1));
}

#[test]
fn decomposition_file_round_trip() {
    let fano = SubMatroid::full(&GeometryCtx::pg(3, 2).unwrap());
    let d = search_decomposition(&fano, 1, 2.0, u64::MAX, &Limits::default())
        .unwrap()
        .unwrap();
    let file = DecompositionFile::from_decomposition(&fano, &d);
    let back = DecompositionFile::from_json(&file.to_json().unwrap()).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.matroid().unwrap().elements(), fano.elements());
}

#[test]
fn matroid_text_round_trip() {
    let ctx = GeometryCtx::pg(4, 3).unwrap();
    let m = SubMatroid::restrict(&ctx, &[0, 5, 17, 39]).unwrap();
    let back = SubMatroid::from_text(&m.to_text()).unwrap();
    assert_eq!(back.elements(), m.elements());
    assert_eq!((back.ctx().n(), back.ctx().q()), (4, 3));
    let commented = "# a line\n3 2\n\n0 # origin\n6\n";
    assert_eq!(
        SubMatroid::from_text(commented).unwrap().elements(),
        &[0, 6]
    );
    assert!(SubMatroid::from_text("3 2\nseven\n").is_err());
    assert!(SubMatroid::from_text("3 2\n7\n").is_err());
}

/// Test-side evaluation of the three requirements on n in floating point.
fn conditions_f64(n: u64, q: f64, p: f64, b: f64, c: f64, delta: f64) -> bool {
    let d = (n as f64).ln().ln().ceil();
    if d < 3.0 {
        return false;
    }
    let size = n as f64 * q.powf(-d * d) > (c * (1.0 + delta) * p / (q - 1.0)).powi(2);
    let density = 0.5 * p * (q.powf(d) - 1.0) / ((q - 1.0) * d) > b;
    size && density
}

#[test]
fn threshold_matches_linear_scan() {
    // The scan window covers the ⌈ln ln n⌉ = 3 band, where every case below settles.
    for (q, p, b, c, delta) in [
        (2u32, 1.0, 1usize, 1.0, 0.1),
        (3, 1.0, 1, 1.0, 0.1),
        (2, 1.0, 1, 2.0, 0.1),
        (2, 1.0, 1, 3.0, 0.1),
        (3, 0.9, 1, 1.5, 0.2),
    ] {
        let window = 100_000u64;
        let last_bad = (2..window)
            .rev()
            .find(|&n| !conditions_f64(n, q as f64, p, b as f64, c, delta))
            .unwrap();
        let n0 = threshold_n0(q, p, b, c, delta, LogBase::Natural).unwrap();
        assert_eq!(
            n0,
            last_bad as u128 + 1,
            "q={q} p={p} b={b} c={c} delta={delta}"
        );
        assert!(
            conditions_at(n0, q, p, b, c, delta, LogBase::Natural)
                .unwrap()
                .all
        );
    }
}

#[test]
fn threshold_monotone_in_b_and_c() {
    let mut prev = 0;
    for c in [1.0, 1.5, 2.0, 3.0, 5.0] {
        let n0 = threshold_n0(3, 1.0, 1, c, 0.1, LogBase::Natural).unwrap();
        assert!(n0 >= prev);
        prev = n0;
    }
    let mut prev = 0;
    for b in 1..=3 {
        match threshold_n0(4, 1.0, b, 1.0, 0.1, LogBase::Natural) {
            Ok(n0) => {
                assert!(n0 >= prev);
                prev = n0;
            }
            Err(_) => prev = u128::MAX,
        }
    }
}

#[test]
fn counting_chain_at_threshold() {
    let n0 = threshold_n0(2, 1.0, 1, 1.0, 0.1, LogBase::Natural).unwrap();
    let r = counting_bound_report(n0 as u64, 2, 1.0, 1, 1.0, 0.1, LogBase::Natural).unwrap();
    assert_eq!(r.regimes.len(), 2);
    assert!(r.lemma5_final_step);
    for regime in &r.regimes {
        assert_eq!(regime.steps.len(), 4);
        assert_eq!(regime.chain_holds, regime.steps.iter().all(|s| s.holds));
    }
}
