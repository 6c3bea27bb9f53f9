//! End-to-end acceptance criteria. Run with `cargo test --test acceptance`;
//! prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use addcomb::checks::{
    check_balog, check_cauchy_schwarz, check_gp_energy, check_ungar, gp_set, middle_third_octuples,
    octuple_linear_system_holds, octuple_product_identity_holds, CsMode,
};
use addcomb::harness::{
    conjecture_probe, default_families, gen_family, run_survey, to_csv, write_outputs, SurveyConfig,
};
use addcomb::incidence::check_elekes_construction;
use addcomb::set::{
    energy, energy_bruteforce, is_sidon, mult_energy, sumset, EnergyMode, FiniteSet,
};
use addcomb::sunit::{
    build_diff_graph, build_lattice, count_nondeg_paths, gamma_exponents, gamma_member, is_nondegenerate_path,
    path_count_lower_bound, prune_min_degree, step3_params, subspace_bound, DiffGraph, GroupSpec,
};
use addcomb::Rational;
use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d).unwrap()
}

fn interval(n: i64) -> FiniteSet {
    FiniteSet::from_ints(1..=n)
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    q(rng.gen_range(-num..=num), rng.gen_range(1..=den))
}

fn balog_tightness() -> Outcome {
    for n in 1..=50 {
        let r = check_balog(&interval(n)).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("n={n}: {r}"))?;
        if n <= 2 {
            ensure(r.lhs == r.rhs, || format!("n={n}: expected equality, {r}"))?;
        }
    }
    Ok("n=1..50, equality at n=1,2".into())
}

fn ungar_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut sizes = BTreeSet::new();
    for i in 0..200u64 {
        let n = rng.gen_range(2..=40u64);
        let families = default_families(n, rng.gen());
        let spec = &families[(i % families.len() as u64) as usize];
        let a = gen_family(spec).map_err(|e| e.to_string())?;
        ensure((2..=40).contains(&a.len()), || format!("{spec} has size {}", a.len()))?;
        let r = check_ungar(&a).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("{spec}: {r}"))?;
        sizes.insert(a.len());
    }
    Ok(format!("200 sets, {} distinct sizes", sizes.len()))
}

fn energy_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut with_zero, mut with_negative) = (0, 0);
    for i in 0..500 {
        let size = rng.gen_range(0..=12);
        let mut elems: Vec<Rational> = (0..size).map(|_| random_rational(&mut rng, 6, 3)).collect();
        if i % 3 == 0 {
            elems.push(Rational::zero());
        }
        let a = FiniteSet::from_elements(elems);
        with_zero += usize::from(a.contains_zero());
        with_negative += usize::from(a.iter().any(Rational::is_negative));
        for mode in [EnergyMode::Product, EnergyMode::Sum] {
            let fast = energy(&a, mode);
            let brute = energy_bruteforce(&a, mode).map_err(|e| e.to_string())?;
            ensure(fast == brute, || format!("{a} {mode:?}: {fast} vs oracle {brute}"))?;
        }
    }
    Ok(format!("500 sets ({with_zero} with 0, {with_negative} with negatives)"))
}

/// `(a, b)` with `a <= b`, as exponents.
fn canonical_octuple_count(n: u32) -> u64 {
    let pairs: Vec<u128> = (1..=n).flat_map(|a| (a..=n).map(move |b| (1u128 << a) + (1u128 << b))).collect();
    let mut count = 0;
    for &p in &pairs {
        for &q in &pairs {
            for &r in &pairs {
                for &s in &pairs {
                    count += u64::from(p * q == r * s);
                }
            }
        }
    }
    count
}

fn gp_construction() -> Outcome {
    for n in [3u32, 6, 9, 12] {
        let a = gp_set(n);
        ensure(is_sidon(&a), || format!("{{2^1..2^{n}}} is not Sidon"))?;
        let octs = middle_third_octuples(i64::from(n)).map_err(|e| e.to_string())?;
        ensure(octs.len() == (n as usize / 3).pow(5), || format!("n={n}: {} octuples", octs.len()))?;
        if n == 6 {
            ensure(octs.len() == 32, || format!("n=6 gives {} octuples", octs.len()))?;
        }
        for o in &octs {
            ensure(o.iter().all(|&x| (1..=i64::from(n)).contains(&x)), || format!("{o:?} leaves [1, {n}]"))?;
            ensure(octuple_linear_system_holds(o), || format!("{o:?} fails the linear system"))?;
            ensure(octuple_product_identity_holds(o), || format!("{o:?} fails the product identity"))?;
        }
        let r = check_gp_energy(n).map_err(|e| e.to_string())?;
        ensure(r.holds, || r.to_string())?;
        let want_rhs = match n {
            6 => Some(32),
            9 => Some(243),
            _ => None,
        };
        if let Some(w) = want_rhs {
            ensure(r.rhs == BigInt::from(w), || format!("n={n}: rhs {}", r.rhs))?;
        }
        if n <= 6 {
            let e = mult_energy(&sumset(&a, &a));
            let c = canonical_octuple_count(n);
            ensure(e == c, || format!("n={n}: E*(A+A)={e} but {c} canonical octuples"))?;
        }
    }
    Ok("n=3,6,9,12; 32 octuples at n=6; rhs 32 and 243".into())
}

fn cauchy_schwarz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let size = rng.gen_range(1..=30);
        let b = FiniteSet::from_elements(
            (0..size).map(|_| random_rational(&mut rng, 40, 4)).filter(|x| !x.is_zero()),
        );
        if b.is_empty() {
            continue;
        }
        for mode in [CsMode::Ratio, CsMode::Product] {
            let r = check_cauchy_schwarz(&b, mode).map_err(|e| e.to_string())?;
            ensure(r.holds, || r.to_string())?;
        }
    }
    Ok("200 zero-free sets, both modes".into())
}

fn sunit_closed_form() -> Outcome {
    let spec = GroupSpec::new(vec![Rational::from(2)]).unwrap();
    for n in 4..=64i64 {
        let g = build_diff_graph(&interval(n), &spec).map_err(|e| e.to_string())?;
        let want: i64 = 2 * (0..).map(|j| 1i64 << j).take_while(|&p| p < n).map(|p| n - p).sum::<i64>();
        ensure(g.ordered_pair_count() as i64 == want, || format!("n={n}: {} vs {want}", g.ordered_pair_count()))?;
        if n == 10 {
            ensure(want == 50, || format!("n=10 gives {want}"))?;
        }
    }
    Ok("n=4..64, n=10 gives 50".into())
}

fn gamma_oracle() -> Outcome {
    let cases: [(Vec<Rational>, Rational); 3] = [
        (vec![Rational::from(2)], Rational::from(3)),
        (vec![Rational::from(6), Rational::from(10)], Rational::from(2)),
        (vec![q(2, 3), Rational::from(5)], Rational::from(3)),
    ];
    let mut checked = 0;
    for (gens, outside) in cases {
        let lat = build_lattice(&GroupSpec::new(gens.clone()).unwrap()).map_err(|e| e.to_string())?;
        let mut reachable = BTreeSet::from([Rational::one()]);
        for g in &gens {
            let powers: Vec<Rational> = (-6..=6).map(|z| g.pow(z).unwrap()).collect();
            reachable = reachable.iter().flat_map(|x| powers.iter().map(move |p| x * p)).collect();
        }
        let seven = Rational::from(7);
        for x in &reachable {
            for y in [x.clone(), -x.clone(), x * &seven, x * &outside, x.recip().unwrap()] {
                let expected = reachable.contains(&y.abs());
                let got = gamma_member(&y, &lat).map_err(|e| e.to_string())?;
                ensure(got == expected, || format!("generators {gens:?}: {y} oracle {expected}, got {got}"))?;
                if let Some(z) = gamma_exponents(&y, &lat).map_err(|e| e.to_string())? {
                    let prod = gens
                        .iter()
                        .zip(&z)
                        .fold(Rational::one(), |acc, (g, e)| acc * g.pow(i32::try_from(e.clone()).unwrap()).unwrap());
                    ensure(prod == y.abs(), || format!("{y}: exponents {z:?} give {prod}"))?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} candidates over 3 generator sets"))
}

fn paths_respect_bound(g: &DiffGraph, label: &str) -> Result<usize, String> {
    let Some(delta) = g.min_degree() else { return Ok(0) };
    let mut checks = 0;
    for k in 1..=3u32 {
        if delta < 1 << (k + 1) {
            continue;
        }
        let bound = path_count_lower_bound(delta as u64, k);
        for v in 0..g.vertex_count() {
            let c = count_nondeg_paths(g, v, k as usize).map_err(|e| e.to_string())?;
            ensure(BigInt::from(c.total) >= bound, || format!("{label} v={v} k={k}: {} < {bound}", c.total))?;
            checks += 1;
        }
    }
    Ok(checks)
}

fn path_machinery() -> Outcome {
    ensure(!is_nondegenerate_path(&[Rational::from(-1), Rational::from(1), Rational::from(-1)]), || {
        "(-1, 1, -1) accepted".into()
    })?;
    ensure(is_nondegenerate_path(&[Rational::from(-1), Rational::from(-2)]), || "(-1, -2) rejected".into())?;
    let mut checks = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for m in 1..=12 {
        checks += paths_respect_bound(&DiffGraph::complete(interval(m)), &format!("K_{m} on [1,{m}]"))?;
        let scattered = FiniteSet::from_elements((0..m).map(|_| random_rational(&mut rng, 50, 5)));
        checks += paths_respect_bound(&DiffGraph::complete(scattered), &format!("K_{m} scattered"))?;
    }
    let groups = [vec![Rational::from(2)], vec![Rational::from(2), Rational::from(3)]];
    for gens in groups {
        let spec = GroupSpec::new(gens.clone()).unwrap();
        for n in [16, 32, 48] {
            let g = build_diff_graph(&interval(n), &spec).map_err(|e| e.to_string())?;
            for t in [4, 8] {
                let pruned = prune_min_degree(&g, t);
                checks += paths_respect_bound(&pruned, &format!("Γ={gens:?} n={n} t={t}"))?;
            }
        }
    }
    ensure(checks > 0, || "no graph met a degree threshold".into())?;
    Ok(format!("{checks} (vertex, k) pairs"))
}

fn subspace_arithmetic() -> Outcome {
    let b = subspace_bound(1, 1).map_err(|e| e.to_string())?;
    ensure(b == BigUint::from(68_719_476_736u64), || format!("subspace_bound(1,1) = {b}"))?;
    let p = step3_params(&q(1, 2)).map_err(|e| e.to_string())?;
    ensure(p.k == 4, || format!("k = {}", p.k))?;
    let reference = 1.0 / (5.0 * 4f64.powi(5) * 32f64.ln());
    let rel = ((p.c - reference) / reference).abs();
    ensure(rel < 1e-7, || format!("c = {} vs {reference}", p.c))?;
    ensure(format!("{:.2e}", p.c) == "5.64e-5", || format!("c = {} does not round to 5.64e-5", p.c))?;
    Ok(format!("bound 68719476736, k=4, c={:.4e}", p.c))
}

fn elekes_construction() -> Outcome {
    let s = |v: &[i64]| FiniteSet::from_ints(v.iter().copied());
    let r = check_elekes_construction(&s(&[1, 2]), &s(&[0, 1]), &s(&[0, 1])).map_err(|e| e.to_string())?;
    ensure(r.incidences == 8, || format!("example gives {} incidences", r.incidences))?;
    ensure(r.min_line_incidences >= 2 && r.check.holds, || r.check.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    while done < 100 {
        let pick = |rng: &mut ChaCha8Rng| {
            let size = rng.gen_range(1..=10);
            FiniteSet::from_elements((0..size).map(|_| random_rational(rng, 8, 3)))
        };
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let b_plus_c = sumset(&b, &c);
        if a.without_zero().is_empty() || (b_plus_c.len() == 1 && b_plus_c.contains_zero()) {
            continue;
        }
        let r = check_elekes_construction(&a, &b, &c).map_err(|e| e.to_string())?;
        ensure(r.check.holds && r.min_line_incidences >= c.len() as u64, || {
            format!("A={a} B={b} C={c}: {}", r.check)
        })?;
        done += 1;
    }
    Ok("example has 8 incidences; 100 random triples".into())
}

fn survey_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = SurveyConfig::default();
    let first = run_survey(&cfg).map_err(|e| e.to_string())?;
    let second = run_survey(&cfg).map_err(|e| e.to_string())?;
    let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_outputs(&first, &cfg.expressions, &p1).map_err(|e| e.to_string())?;
    write_outputs(&second, &cfg.expressions, &p2).map_err(|e| e.to_string())?;
    let (b1, b2) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    ensure(b1 == b2, || "CSV bytes differ between runs".into())?;
    ensure(to_csv(&first, &[]).unwrap().as_bytes() == b1.as_slice(), || "CSV differs from its file".into())?;
    let all_ok = first
        .iter()
        .all(|r| r.ungar_ok != Some(false) && r.balog_ok != Some(false) && r.cs_ok != Some(false));
    ensure(all_ok, || "a survey row failed an inequality".into())?;
    let records: Vec<_> = first.into_iter().map(|r| r.record).collect();
    let flagged = conjecture_probe(&records, &Rational::one(), &Rational::from(4));
    ensure(flagged.is_empty(), || {
        format!("flagged: {:?}", flagged.iter().map(|r| &r.descriptor).collect::<Vec<_>>())
    })?;
    Ok(format!("{} rows, {} bytes, no candidates", records.len(), b1.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("balog tightness on intervals", balog_tightness, 10),
        ("ungar bound on default families", ungar_bound, 30),
        ("energy oracle equivalence", energy_oracle, 30),
        ("geometric progression construction", gp_construction, 60),
        ("cauchy-schwarz in both modes", cauchy_schwarz, 60),
        ("s-unit graph closed form", sunit_closed_form, 5),
        ("group membership oracle", gamma_oracle, 30),
        ("nondegenerate path machinery", path_machinery, 30),
        ("subspace bound arithmetic", subspace_arithmetic, 1),
        ("elekes construction", elekes_construction, 30),
        ("survey reproducibility and probe", survey_reproducibility, 120),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(limit) => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit}s"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
