//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use mirrorcell::arrangement::{build_akl, build_monomial_reflection, Arrangement, Hyperplane};
use mirrorcell::cli::run_args;
use mirrorcell::cyclotomic::{CycloNum, FieldExt};
use mirrorcell::fibration::{
    compactified_residual, coordinate_section_count, enumerate_infinity_points, fiber_residual,
    jacobian_report, map_f, preimage_union_check, sample_base_point, sample_fiber_points,
    transversality_at_infinity, BasePoint, FibrationParams,
};
use mirrorcell::lattice::{characteristic_polynomial, characteristic_polynomial_by_subsets, triple_check, Flat};
use mirrorcell::numeric::{derive_seed, projective_distance};
use mirrorcell::restriction::{identify_monomial_type, linearly_isomorphic, restrict, restriction_closure_scan, MonomialType};
use mirrorcell::topology::{free_rank, genus, product_form_free_rank, puncture_count, riemann_hurwitz_oracle};

const SEED: u64 = 2718;
const BASE_POINTS: u64 = 3;
const RESIDUAL: f64 = 1e-9;
const RANK: f64 = 1e-6;
const SEPARATION: f64 = 1e-6;

type Outcome = Result<String, String>;

fn fail(msg: impl Into<String>) -> Outcome {
    Err(msg.into())
}

/// (k, l, r) with l ∈ {2,3,4}, r ∈ {1,2,3}, 0 ≤ k ≤ l.
fn grid() -> Vec<FibrationParams> {
    let mut out = Vec::new();
    for l in 2..=4 {
        for r in 1..=3 {
            for k in 0..=l {
                out.push(FibrationParams::new(k, l, r).unwrap());
            }
        }
    }
    out
}

fn base_points(p: &FibrationParams) -> Vec<BasePoint> {
    (0..BASE_POINTS)
        .map(|b| sample_base_point(p.l, derive_seed(SEED, &[p.k as u64, p.l as u64, p.r as u64, b])).unwrap())
        .collect()
}

fn count_identity() -> Outcome {
    let start = Instant::now();
    let mut points = 0;
    for p in grid() {
        let expected = p.k as u64 * (p.r as u64).pow(p.l as u32 - 2) + (p.r as u64).pow(p.l as u32 - 1);
        if expected != (p.k + p.r) as u64 * (p.r as u64).pow(p.l as u32 - 2) {
            return fail(format!("{p:?}: the two count expressions differ"));
        }
        for z in base_points(&p) {
            let pts = enumerate_infinity_points(&z, &p).map_err(|e| format!("{p:?}: {e}"))?;
            if pts.len() as u64 != expected {
                return fail(format!("{p:?}: {} points, expected {expected}", pts.len()));
            }
            for (i, q) in pts.iter().enumerate() {
                if q.coords[0].norm() != 0.0 {
                    return fail(format!("{p:?}: point {i} has y0 != 0"));
                }
                let res = compactified_residual(&q.coords, &z, &p);
                if !(res <= RESIDUAL) {
                    return fail(format!("{p:?}: point {i} residual {res:e}"));
                }
                for other in &pts[i + 1..] {
                    let d = projective_distance(&q.coords, &other.coords);
                    if !(d > SEPARATION) {
                        return fail(format!("{p:?}: points closer than {d:e}"));
                    }
                }
            }
            points += pts.len();
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 30.0 {
        return fail(format!("took {secs:.1}s"));
    }
    Ok(format!("{points} points at infinity on {} triples x {BASE_POINTS} base points, {secs:.2}s", grid().len()))
}

fn smoothness() -> Outcome {
    let mut total = 0;
    let mut worst_res = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    for p in grid() {
        for (b, z) in base_points(&p).iter().enumerate() {
            let samples = sample_fiber_points(z, &p, 100, derive_seed(SEED, &[7, p.k as u64, p.l as u64, p.r as u64, b as u64]))
                .map_err(|e| e.to_string())?;
            if samples.len() != 100 {
                return fail(format!("{p:?}: {} samples", samples.len()));
            }
            for s in &samples {
                let res = fiber_residual(&s.y, z, &p);
                let ratio = jacobian_report(&s.y, &p);
                let back = map_f(&s.y, &p);
                let roundtrip = back.iter().zip(z.coords()).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
                if !(res <= RESIDUAL && roundtrip <= RESIDUAL && ratio > RANK && s.min_hyperplane_distance > 0.0) {
                    return fail(format!("{p:?}: residual {res:e}, ratio {ratio:e}"));
                }
                worst_res = worst_res.max(res);
                worst_ratio = worst_ratio.min(ratio);
            }
            total += samples.len();
        }
    }
    Ok(format!("{total} samples, max residual {worst_res:.2e}, min Jacobian ratio {worst_ratio:.2e}, 0 sampling failures"))
}

fn transversality() -> Outcome {
    let mut n = 0;
    for p in grid() {
        for z in base_points(&p) {
            for q in enumerate_infinity_points(&z, &p).map_err(|e| e.to_string())? {
                if !transversality_at_infinity(&q, &z, &p) {
                    return fail(format!("{p:?}: {:?} not transverse", q.coords));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} points at infinity transverse"))
}

fn section_counts() -> Outcome {
    let mut n = 0;
    for p in grid() {
        let expected = p.bezout() as usize;
        for z in base_points(&p) {
            for i in p.k + 1..=p.l {
                let c = coordinate_section_count(&z, &p, i).map_err(|e| format!("{p:?} i={i}: {e}"))?;
                if c != expected {
                    return fail(format!("{p:?} i={i}: {c} != {expected}"));
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} sections, every count equal to (k+r)r^(l-2)"))
}

fn preimage_identity() -> Outcome {
    let mut worst_on = 0.0f64;
    let mut worst_off = f64::INFINITY;
    for p in grid() {
        let rep = preimage_union_check(&p, 200, derive_seed(SEED, &[11, p.k as u64, p.l as u64, p.r as u64]))
            .map_err(|e| e.to_string())?;
        if !rep.pass || rep.on_wall_samples != 200 || rep.off_wall_samples != 200 {
            return fail(format!("{p:?}: {rep:?}"));
        }
        worst_on = worst_on.max(rep.max_on_wall_residual);
        worst_off = worst_off.min(rep.min_off_wall_margin);
    }
    Ok(format!("200+200 samples per triple, max on-wall {worst_on:.2e}, min off-wall margin {worst_off:.2e}"))
}

fn topology_formulas() -> Outcome {
    let mut identities = 0;
    for l in 2..=6 {
        for r in 1..=6 {
            for k in 0..=l.min(6) {
                let p = FibrationParams::new(k, l, r).unwrap();
                let g = genus(&p).map_err(|e| e.to_string())? as i128;
                let pc = puncture_count(&p) as i128;
                let n = free_rank(&p).map_err(|e| e.to_string())? as i128;
                if n != 2 * g + pc - 1 || n != product_form_free_rank(&p, 1) {
                    return fail(format!("{p:?}: N={n}, product form {}", product_form_free_rank(&p, 1)));
                }
                identities += 1;
            }
        }
    }
    let start = Instant::now();
    let mut runs = 0;
    for k in 0..=2 {
        for r in 1..=3 {
            let p = FibrationParams::new(k, 2, r).unwrap();
            for z in base_points(&p) {
                let o = riemann_hurwitz_oracle(&p, &z).map_err(|e| format!("{p:?}: {e}"))?;
                let formula = (genus(&p).unwrap(), puncture_count(&p), free_rank(&p).unwrap());
                if (o.genus, o.punctures, o.free_rank) != formula {
                    return fail(format!("{p:?}: oracle {o:?} vs {formula:?}"));
                }
                runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return fail(format!("oracle took {secs:.1}s"));
    }
    let p = FibrationParams::new(0, 2, 2).unwrap();
    let oracle_n = riemann_hurwitz_oracle(&p, &base_points(&p)[0]).unwrap().free_rank as i128;
    let minus = product_form_free_rank(&p, -1);
    if !(oracle_n == 1 && minus == -1) {
        return fail(format!("(0,2,2): oracle N = {oracle_n}, trailing -1 form = {minus}"));
    }
    Ok(format!(
        "{identities} identities, {runs} oracle runs in {secs:.2}s; at (0,2,2) the trailing -1 form gives {minus} against oracle N = {oracle_n}"
    ))
}

fn combinatorics() -> Outcome {
    let mut expanded = 0;
    for p in grid() {
        let a = build_akl(p.k, p.l, p.r).unwrap();
        if a.len() > 10 {
            continue;
        }
        let brute = characteristic_polynomial_by_subsets(&a).map_err(|e| e.to_string())?;
        if brute != characteristic_polynomial(&a) {
            return fail(format!("{p:?}: subset expansion {brute} differs"));
        }
        expanded += 1;
    }
    let mut triples = 0;
    for l in 2..=3 {
        for r in 1..=3 {
            for k in 0..=l {
                let a = build_akl(k, l, r).unwrap();
                for h in 0..a.len() {
                    if !triple_check(&a, h).map_err(|e| e.to_string())? {
                        return fail(format!("A^{k}_{l}({r}) hyperplane {h}"));
                    }
                    triples += 1;
                }
            }
        }
    }
    Ok(format!("{expanded} subset expansions match, {triples} deletion-restriction triples"))
}

fn coordinate_flat(a: &Arrangement, covector: Vec<CycloNum>) -> Flat {
    let idx = a.index_of(&Hyperplane::new(covector).unwrap()).unwrap();
    Flat::from_hyperplanes(a, &[idx]).unwrap()
}

fn restrictions() -> Outcome {
    let mut rows = 0;
    for l in 2..=4 {
        for r in 1..=3 {
            let mut ps = vec![1, r];
            ps.dedup();
            for p in ps {
                let table = restriction_closure_scan(r, p, l).map_err(|e| e.to_string())?;
                table.ensure_identified().map_err(|e| e.to_string())?;
                rows += table.rows.len();
            }
        }
    }
    for l in 3..=4 {
        for r in 1..=3 {
            let a = build_akl(l, l, r).unwrap();
            let f = a.field().clone();
            let mut c = vec![f.zero(); l];
            c[l - 1] = f.one();
            let induced = restrict(&a, &coordinate_flat(&a, c)).unwrap().induced;
            if !induced.same_hyperplanes(&build_akl(l - 1, l - 1, r).unwrap()) {
                return fail(format!("A^{l}_{l}({r}) restricted to y_l = 0"));
            }
        }
    }
    let a = build_monomial_reflection(2, 2, 3).unwrap();
    let f = a.field().clone();
    let induced = restrict(&a, &coordinate_flat(&a, vec![f.one(), -f.one(), f.zero()])).unwrap().induced;
    let target = build_akl(1, 2, 2).unwrap();
    let types = identify_monomial_type(&induced, 2).unwrap();
    if !(linearly_isomorphic(&induced, &target).unwrap() && types.contains(&MonomialType { k: 1, m: 2, r: 2 })) {
        return fail(format!("A^0_3(2) on y1 = y2 identified as {types:?}"));
    }
    Ok(format!("{rows} flats identified over G(r,p,l), l <= 4, r <= 3; both worked examples exact"))
}

fn determinism() -> Outcome {
    let args = ["mirrorcell", "verify", "--grid", "4", "3", "--seed", "7"];
    let a = run_args(args);
    let b = run_args(args);
    if a.code != 0 || a != b {
        return fail(format!("in-process runs differ or fail (exit {})", a.code));
    }
    let bin = env!("CARGO_BIN_EXE_mirrorcell");
    let runs: Vec<_> = (0..2)
        .map(|_| Command::new(bin).args(&args[1..]).env_remove("MIRRORCELL_SEED").output().unwrap())
        .collect();
    if !runs.iter().all(|o| o.status.success()) || runs[0].stdout != runs[1].stdout {
        return fail("binary runs differ or fail");
    }
    if runs[0].stdout != a.stdout.as_bytes() {
        return fail("binary output differs from in-process output");
    }
    serde_json::from_slice::<serde_json::Value>(&runs[0].stdout).map_err(|e| e.to_string())?;
    Ok(format!("4 runs, {} identical bytes of JSON", runs[0].stdout.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("count identity at infinity", count_identity),
        ("fiber smoothness", smoothness),
        ("transversality at infinity", transversality),
        ("coordinate section counts", section_counts),
        ("preimage of the braid walls", preimage_identity),
        ("topology formulas and oracle", topology_formulas),
        ("lattice combinatorics", combinatorics),
        ("restriction identification", restrictions),
        ("determinism of verify", determinism),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} PASS {name}: {detail} [{secs:.2}s]", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL {name}: {detail} [{secs:.2}s]", n + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
