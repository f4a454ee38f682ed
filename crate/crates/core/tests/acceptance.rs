//! End-to-end acceptance suite; one line per criterion.

use std::time::{Duration, Instant};

use nambu_core::algebroid::{algebroid_battery, AlgebroidOptions};
use nambu_core::cli::run_args;
use nambu_core::fields::{lie_bracket_poly, ScalarField, VectorField};
use nambu_core::gallery::{
    canonical_structure, census, convergence_slope, gallery, loop_bracket, classify_loop, scaled_structure, subalgebra_check,
    DiscretizedLoop, GalleryParams, LieAlgebraPresentation,
};
use nambu_core::multilinear::{subsets, AltTensor, MultiIndex, Variance};
use nambu_core::nambu::{
    check_filippov_direct, check_filippov_structural, check_lie_derivative_criterion, distribution_ranks, exact_rank, plucker_check,
    CheckOptions, NambuStructure, PointKind,
};
use nambu_core::normal_form::{check_frame_identities, darboux_chart, verify_chart, ChartOptions};
use nambu_core::poly::Poly;
use nambu_core::report::Verdict;
use nambu_core::specfile::SpecFile;
use nambu_core::towers::{
    check_compat, classify_tower_point_direct, classify_tower_point_projective, limit_bracket_levels, TowerPoint, TowerPointKind,
};
use nambu_core::Q;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).expect("fixture")
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    if t.elapsed() > limit {
        return Err(format!("{what} took {:.1?} (limit {limit:?})", t.elapsed()));
    }
    Ok(())
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn params(kv: &[(&str, &str)]) -> GalleryParams {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn c1_census() -> Outcome {
    let t = Instant::now();
    let o = CheckOptions::default();
    let items = census().map_err(|e| e.to_string())?;
    let mut structural_runs = 0;
    for it in &items {
        let s = &it.structure;
        let direct = check_filippov_direct(s, &o).map_err(|e| e.to_string())?.passed();
        let lie = check_lie_derivative_criterion(s, &o).passed();
        let st = check_filippov_structural(s, &o);
        ensure(direct == it.expected_fi, || format!("{}: direct verdict {direct}, expected {}", s.name, it.expected_fi))?;
        ensure(lie == direct, || format!("{}: lie-derivative {lie} vs direct {direct}", s.name))?;
        if s.r() >= 3 {
            ensure(st.verdict != Verdict::Unsupported, || format!("{}: structural unsupported", s.name))?;
            ensure(st.passed() == direct, || format!("{}: structural {} vs direct {direct}", s.name, st.passed()))?;
            structural_runs += 1;
        }
    }
    within(t, Duration::from_secs(60), "census")?;
    Ok(format!("{} structures, {structural_runs} with structural verifier, {:.1?}", items.len(), t.elapsed()))
}

/// Decomposable iff zero or the image of contraction with 2-covectors
/// is 3-dimensional.
fn decomposable_oracle(t: &AltTensor<Q>) -> bool {
    if t.is_zero() {
        return true;
    }
    let n = t.n();
    let image: Vec<Vec<Q>> = subsets(n, 2)
        .iter()
        .map(|ab| AltTensor::<Q>::basis(n, ab, Variance::Covector).contract_into(t).unwrap().components())
        .collect();
    exact_rank(&image) == 3
}

fn c2_plucker() -> Outcome {
    let t = Instant::now();
    let mut total = 0;
    let mut decomposable = 0;
    for n in 3..=6 {
        let basis = MultiIndex::all(n, 3);
        for k in 0..=3 {
            for support in subsets(basis.len(), k) {
                for signs in 0..(1u32 << k) {
                    let mut lam = AltTensor::zero(n, 3, Variance::Vector);
                    for (j, &b) in support.iter().enumerate() {
                        lam.add_at(basis[b].clone(), if signs >> j & 1 == 1 { -Q::ONE } else { Q::ONE });
                    }
                    let res = plucker_check(&lam, 0.0).map_err(|e| e.to_string())?;
                    let oracle = decomposable_oracle(&lam);
                    ensure(res.decomposable == oracle, || format!("disagreement on {lam:?}: plucker {} oracle {oracle}", res.decomposable))?;
                    if let (true, Some(f)) = (oracle, &res.factors) {
                        let v: Vec<AltTensor<Q>> = f.iter().map(|c| AltTensor::from_components(Variance::Vector, c.clone())).collect();
                        let back = AltTensor::wedge_all(n, Variance::Vector, &v).unwrap();
                        ensure(back == lam, || format!("factors of {lam:?} do not rebuild it"))?;
                    }
                    total += 1;
                    decomposable += oracle as usize;
                }
            }
        }
    }
    within(t, Duration::from_secs(300), "plucker sweep")?;
    Ok(format!("{total} tensors, {decomposable} decomposable, {:.1?}", t.elapsed()))
}

fn q(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&a| Q::from(a)).collect()
}

fn chart_cases() -> Vec<(NambuStructure, Vec<Q>)> {
    let x1 = ScalarField::parse("x1").unwrap();
    vec![
        (canonical_structure(3, 3).unwrap(), q(&[0, 0, 0])),
        (scaled_structure(3, 3, &x1).unwrap(), q(&[1, 0, 0])),
        (scaled_structure(3, 3, &ScalarField::parse("x1^2 + 1").unwrap()).unwrap(), q(&[0, 0, 0])),
        (scaled_structure(4, 3, &x1).unwrap(), q(&[1, 0, 0, 0])),
    ]
}

fn c3_darboux() -> Outcome {
    let mut worst: f64 = 0.0;
    for (s, x) in chart_cases() {
        let t = Instant::now();
        let chart = darboux_chart(&s, &x, &ChartOptions::default()).map_err(|e| format!("{}: {e}", s.name))?;
        let rep = verify_chart(&s, &chart, 32, 1);
        ensure(rep.evaluated == 32, || format!("{}: {} samples", s.name, rep.evaluated))?;
        ensure(rep.passed() && rep.residual.max < 1e-6, || format!("{}: residual {:e}", s.name, rep.residual.max))?;
        within(t, Duration::from_secs(30), &s.name)?;
        worst = worst.max(rep.residual.max);
    }
    Ok(format!("4 charts, worst residual {worst:e}"))
}

fn c4_frames() -> Outcome {
    for (s, x) in chart_cases() {
        let rep = check_frame_identities(&s, &x, 1).map_err(|e| format!("{}: {e}", s.name))?;
        ensure(rep.passed() && rep.residual.exact && rep.residual.max == 0.0, || format!("{}: {:?}", s.name, rep.witnesses))?;
    }
    Ok("orthogonality and determinant identities exact on 4 frames".into())
}

fn c5_algebroid() -> Outcome {
    let t = Instant::now();
    let opts = AlgebroidOptions { cases: 20, max_degree: 2, ..AlgebroidOptions::default() };
    let mut checks = 0;
    for s in [canonical_structure(3, 3).unwrap(), scaled_structure(3, 3, &ScalarField::parse("x1").unwrap()).unwrap()] {
        for rep in algebroid_battery(&s, true, &opts).map_err(|e| e.to_string())? {
            let exact_zero = rep.check == "locality" || (rep.residual.exact && rep.residual.max == 0.0);
            ensure(rep.passed() && exact_zero, || format!("{} {}: {:?}", s.name, rep.check, rep.witnesses))?;
            checks += 1;
        }
    }
    within(t, Duration::from_secs(120), "algebroid suite")?;
    Ok(format!("{checks} reports, {:.1?}", t.elapsed()))
}

fn c6_singular_witness() -> Outcome {
    let p = |s: &str| Poly::parse(s).unwrap();
    let d1 = vec![p("1"), p("0"), p("0")];
    let x1d3 = vec![p("0"), p("0"), p("x1")];
    let br = lie_bracket_poly(&d1, &x1d3);
    ensure(br == vec![p("0"), p("0"), p("1")], || format!("[d1, x1 d3] = {br:?}"))?;
    let at = q(&[0, 1, 2]);
    let frame: Vec<Vec<Q>> = [d1.clone(), vec![p("0"), p("1"), p("0")], x1d3.clone()]
        .iter()
        .map(|v| v.iter().map(|c| c.eval(&at)).collect())
        .collect();
    let mut with = frame.clone();
    with.push(br.iter().map(|c| c.eval(&at)).collect());
    ensure(exact_rank(&frame) == 2 && exact_rank(&with) == 3, || "no rank jump at x1 = 0".into())?;
    let fields: Vec<VectorField> = [d1, vec![p("0"), p("1"), p("0")], x1d3].into_iter().map(VectorField::from_polys).collect();
    let (rk, rk_br) = distribution_ranks(&fields, &[0.0, 0.5, -0.25]);
    ensure((rk, rk_br) == (2, 3), || format!("numeric ranks {rk}, {rk_br}"))?;
    let s = scaled_structure(3, 3, &ScalarField::parse("x1").unwrap()).unwrap();
    ensure(check_filippov_direct(&s, &CheckOptions::default()).map_err(|e| e.to_string())?.passed(), || "FI fails".into())?;
    Ok("[d1, x1 d3] = d3, rank 2 -> 3 at x1 = 0, FI passes".into())
}

fn c7_lie_groups() -> Outcome {
    let t = Instant::now();
    let lie = LieAlgebraPresentation::heisenberg_times_r();
    let mut tally = (0, 0);
    for span in subsets(4, 3) {
        let list: Vec<String> = span.iter().map(|i| (i + 1).to_string()).collect();
        let basis: Vec<Vec<Q>> = span.iter().map(|&i| (0..4).map(|j| if i == j { Q::ONE } else { Q::ZERO }).collect()).collect();
        let sub = subalgebra_check(&lie, &basis).map_err(|e| e.to_string())?;
        let item = gallery("heisenberg", &params(&[("times_r", "true"), ("span", &list.join(","))])).map_err(|e| e.to_string())?;
        let rep = check_filippov_direct(&item.structure, &CheckOptions::default()).map_err(|e| e.to_string())?;
        if sub {
            ensure(rep.passed() && rep.residual.exact, || format!("span {list:?}: subalgebra but FI fails"))?;
            tally.0 += 1;
        } else {
            ensure(!rep.passed() && !rep.witnesses.is_empty(), || format!("span {list:?}: not a subalgebra but no FI witness"))?;
            tally.1 += 1;
        }
    }
    let full = gallery("heisenberg", &GalleryParams::new()).map_err(|e| e.to_string())?;
    ensure(check_filippov_direct(&full.structure, &CheckOptions::default()).map_err(|e| e.to_string())?.passed(), || "Heisenberg FI fails".into())?;
    within(t, Duration::from_secs(120), "Lie sweep")?;
    Ok(format!("{} subalgebras pass, {} non-subalgebras fail with witnesses", tally.0, tally.1))
}

fn c8_loops() -> Outcome {
    let coords: Vec<ScalarField> = (0..3).map(ScalarField::var).collect();
    let h = scaled_structure(3, 3, &ScalarField::parse("x1").unwrap()).unwrap();
    let fam: Vec<ScalarField> = ["x1^2 + x2", "x2 x3", "x3 + x1 x2"].iter().map(|s| ScalarField::parse(s).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
        let lp = loop_bracket(&h, &fam, &DiscretizedLoop::constant(&x, 16).unwrap()).map_err(|e| e.to_string())?;
        let pt = h.bracket_eval(&fam[..2], &fam[2], &x).map_err(|e| e.to_string())?;
        worst = worst.max((lp - pt).abs());
    }
    ensure(worst <= 1e-12, || format!("constant loop deviates by {worst:e}"))?;
    let ns = [8, 16, 32, 64];
    let errs: Vec<f64> =
        ns.iter().map(|&n| (loop_bracket(&h, &coords, &DiscretizedLoop::kernel_loop(n, 0.25, 0.1).unwrap()).unwrap() - 0.1).abs()).collect();
    let slope = convergence_slope(&ns, &errs);
    ensure(slope >= 1.9, || format!("slope {slope:.3} from {errs:?}"))?;
    let cases = [
        (DiscretizedLoop::constant(&[0.0; 3], 8).unwrap(), PointKind::Singular),
        (DiscretizedLoop::constant(&[1.0, 0.0, 0.0], 8).unwrap(), PointKind::Regular),
        (
            DiscretizedLoop::from_fn(32, |t| vec![0.5 * (std::f64::consts::TAU * t).cos(), 0.5 * (std::f64::consts::TAU * t).sin(), 0.0]).unwrap(),
            PointKind::Regular,
        ),
    ];
    for (i, (g, want)) in cases.iter().enumerate() {
        let k = classify_loop(&h, g, 1).map_err(|e| e.to_string())?;
        ensure(k.class == *want && k.consistent, || format!("loop example {}: {k:?}", i + 1))?;
    }
    Ok(format!("constant-loop deviation {worst:e}, slope {slope:.2}, 3 loop classes"))
}

fn rational(rng: &mut ChaCha8Rng, zero_bias: bool) -> Q {
    if zero_bias && rng.random_bool(0.4) {
        return Q::ZERO;
    }
    Q::new(rng.random_range(-24..=24), 16)
}

fn c9_towers() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut seen = (0, 0, 0);
    for name in ["tower_projective.toml", "tower_projective_x1.toml"] {
        let tw = SpecFile::parse_str(&fixture(name)).and_then(|f| f.tower()).map_err(|e| e.to_string())?;
        ensure(check_compat(&tw).map_err(|e| e.to_string())?.passed(), || format!("{name}: compat fails"))?;
        let top_n = tw.levels()[tw.len() - 1].n();
        let lin: Vec<Poly> = (0..tw.levels()[0].n()).map(Poly::var).collect();
        for k in 0..200 {
            let top: Vec<Q> = (0..top_n).map(|_| rational(&mut rng, true)).collect();
            let p = TowerPoint::from_top(&tw, &top).map_err(|e| e.to_string())?;
            let c = classify_tower_point_projective(&tw, &p).map_err(|e| e.to_string())?;
            ensure(!c.violation(), || format!("{name}: {c:?} at {top:?}"))?;
            match c.class {
                TowerPointKind::Singular => seen.1 += 1,
                _ => seen.0 += 1,
            }
            let gs: Vec<Poly> = (0..tw.r()).map(|j| lin[(k + j) % lin.len()].mul(&lin[(k + 2 * j + 1) % lin.len()]).add(&lin[j])).collect();
            let vals = limit_bracket_levels(&tw, 1, &gs, &p).map_err(|e| e.to_string())?;
            ensure(vals.iter().all(|(_, v)| *v == vals[0].1), || format!("{name}: level-dependent bracket {vals:?}"))?;
        }
    }
    let tw = SpecFile::parse_str(&fixture("tower_direct.toml")).and_then(|f| f.tower()).map_err(|e| e.to_string())?;
    ensure(check_compat(&tw).map_err(|e| e.to_string())?.passed(), || "direct compat fails".into())?;
    for k in 0..200 {
        let h = 1 + k % tw.len();
        let n = tw.levels()[h - 1].n();
        let x: Vec<Q> = (0..n).map(|_| rational(&mut rng, true)).collect();
        let p = TowerPoint::enter(&tw, h, &x).map_err(|e| e.to_string())?;
        let c = classify_tower_point_direct(&tw, &p).map_err(|e| e.to_string())?;
        ensure(c.monotone, || format!("direct point {x:?} at level {h}: {c:?}"))?;
        let regular_from = c.ranks.iter().position(|(_, r)| *r > 0).map(|f| c.ranks[f].0);
        ensure(c.stratum == regular_from, || format!("stratum {:?} vs first regular level {regular_from:?}", c.stratum))?;
        seen.2 += c.stratum.is_none() as usize;
    }
    within(t, Duration::from_secs(120), "tower sweep")?;
    Ok(format!("{} regular and {} singular projective points, {} direct points singular throughout", seen.0, seen.1, seen.2))
}

fn suite(threads: &str) -> String {
    let dir = format!("{}/../../fixtures", env!("CARGO_MANIFEST_DIR"));
    let runs: [&[&str]; 6] = [
        &["check", "canonical3.toml"],
        &["check", "l1_full.toml"],
        &["darboux", "scaled_x1.toml", "--point", "1,0,0", "--grid", "2"],
        &["algebroid", "scaled_x1.toml"],
        &["tower", "tower_projective_x1.toml"],
        &["tower", "tower_direct.toml"],
    ];
    let mut out = String::new();
    for args in runs {
        let mut v: Vec<String> = vec!["nambu".into(), "--seed".into(), "7".into(), "--threads".into(), threads.into()];
        for (i, a) in args.iter().enumerate() {
            v.push(if i == 1 { format!("{dir}/{a}") } else { a.to_string() });
        }
        let o = run_args(v);
        out += &format!("{} {}\n{}{}", o.code, args.join(" "), o.stdout, o.stderr);
    }
    out
}

fn c10_determinism() -> Outcome {
    let a = suite("1");
    let b = suite("1");
    let c = suite("3");
    ensure(a == b, || "two runs differ".into())?;
    ensure(a == c, || "thread count changes the report stream".into())?;
    Ok(format!("{} bytes identical across runs and thread counts", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("FI triple-verifier agreement", c1_census),
        ("decomposability oracle", c2_plucker),
        ("Darboux charts", c3_darboux),
        ("frame identities", c4_frames),
        ("algebroid axioms", c5_algebroid),
        ("singular involutivity witness", c6_singular_witness),
        ("Lie subalgebra correspondence", c7_lie_groups),
        ("loop-space quadrature", c8_loops),
        ("tower theorems", c9_towers),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(f) {
            Ok(Ok(msg)) => println!("criterion {}: PASS {name}: {msg}", i + 1),
            Ok(Err(msg)) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {msg}", i + 1)
            }
            Err(_) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: panicked", i + 1)
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
