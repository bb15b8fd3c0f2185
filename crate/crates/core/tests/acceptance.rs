//! Acceptance suite: one pass/fail line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use focalforge::clifford::{self, CliffordSystem};
use focalforge::curvature::{self, PREDICATE_TOL};
use focalforge::focal::{self, FocalPoint, ShapeMethod, Side};
use focalforge::isofun::Domain;
use focalforge::linalg::{self, fro_dot, max_abs};
use focalforge::loci::{self, FamilySpec};
use focalforge::octonion::CayleyDickson;
use focalforge::{report, rng};
use nalgebra::DMatrix;
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = rng::DEFAULT_SEED;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn audited() -> Vec<FamilySpec> {
    loci::audited_families().into_iter().map(|(m, k, v)| FamilySpec::new(m, k, v, Side::Plus).unwrap()).collect()
}

fn sample(sys: &CliffordSystem, side: Side, stream: &str, i: usize) -> Result<FocalPoint, String> {
    let mut r = rng::stream(SEED, stream, i as u64);
    match side {
        Side::Plus => focal::sample_mplus(sys, &mut r),
        Side::Minus => focal::sample_mminus(sys, &mut r),
    }
    .map_err(err)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn algebra() -> Outcome {
    let (rows, errors) = report::algebra_rows(&CayleyDickson, 1000, SEED);
    ensure(errors.is_empty(), || errors.join("; "))?;
    for r in &rows {
        ensure(r.verdict == "pass", || format!("{}: residual {:e}", r.locus, r.max_residual))?;
    }
    Ok(format!("{} checks on 1000 pairs", rows.len()))
}

fn construction() -> Outcome {
    let mut worst = 0.0_f64;
    for spec in audited() {
        let fam = spec.build().map_err(err)?;
        let res = fam.sys.symmetry_residual().max(fam.sys.relation_residual());
        ensure(res < 1e-12, || format!("{}: residual {res:e}", spec.label()))?;
        worst = worst.max(res);
    }
    let base = clifford::build_indefinite_m8();
    let dual = clifford::dualize(&base).map_err(err)?;
    let id = DMatrix::<f64>::identity(32, 32);
    let prod = max_abs(&(dual.product_matrix() - &id));
    ensure(prod < 1e-12, || format!("dual product differs from +Id by {prod:e}"))?;
    let p9 = clifford::extend_by_one(&base).map_err(err)?;
    let mut ext = max_abs(&(&p9 * &p9 - &id)).max(max_abs(&(&p9 - p9.transpose())));
    for p in base.matrices() {
        ext = ext.max(max_abs(&(p * &p9 + &p9 * p)));
    }
    ensure(ext < 1e-10, || format!("P9 residual {ext:e}"))?;
    ensure(clifford::extend_by_one(&dual).is_err(), || "definite system was extended".into())?;
    Ok(format!("14 systems, worst residual {worst:.1e}; P9 residual {ext:.1e}"))
}

fn spectra() -> Outcome {
    let mut worst = [0.0_f64; 4];
    for spec in audited() {
        let fam = spec.build().map_err(err)?;
        let sys = &fam.sys;
        let (_, m2) = sys.multiplicities();
        let results: Vec<Result<[f64; 4], String>> = (0..100)
            .into_par_iter()
            .map(|i| {
                let fp = sample(sys, Side::Plus, &format!("spectra:{}", spec.label()), i)?;
                let s = focal::shape_ops_mplus(sys, &fp).map_err(err)?;
                let spec_res = s.spectrum_residual().map_err(err)?;
                let (mut gram, mut cube, mut second) = (0.0_f64, 0.0_f64, 0.0_f64);
                for (a, sa) in s.mats.iter().enumerate() {
                    cube = cube.max(max_abs(&(sa * sa * sa - sa)));
                    for (b, sb) in s.mats.iter().enumerate() {
                        let target = if a == b { 2.0 * m2 as f64 } else { 0.0 };
                        gram = gram.max((fro_dot(sa, sb) - target).abs());
                        if a != b {
                            let sb2 = sb * sb;
                            let rhs = &sb2 * sa + sa * &sb2 + sb * sa * sb;
                            second = second.max(max_abs(&(sa - rhs)));
                        }
                    }
                }
                Ok([spec_res, gram, cube, second])
            })
            .collect();
        for r in results {
            let r = r?;
            for (w, v) in worst.iter_mut().zip(r) {
                *w = w.max(v);
            }
        }
    }
    ensure(worst[0] < 1e-6, || format!("spectrum residual {:e}", worst[0]))?;
    ensure(worst[1] < 1e-9, || format!("Gram residual {:e}", worst[1]))?;
    ensure(worst[2] < 1e-9 && worst[3] < 1e-9, || format!("cubic identities {:e} {:e}", worst[2], worst[3]))?;
    Ok(format!(
        "1400 samples: spectrum {:.1e}, Gram {:.1e}, identities {:.1e}",
        worst[0],
        worst[1],
        worst[2].max(worst[3])
    ))
}

fn bounds() -> Outcome {
    let mut n = 0;
    let mut worst_identity = 0.0_f64;
    let mut refined_checks = 0;
    for spec in audited() {
        let fam = spec.build().map_err(err)?;
        for side in [Side::Plus, Side::Minus] {
            let results: Vec<Result<(f64, bool), String>> = (0..20)
                .into_par_iter()
                .map(|i| {
                    let fp = sample(&fam.sys, side, &format!("bounds:{}:{}", spec.label(), side.as_str()), i)?;
                    let s = curvature::shape_operators(&fam.sys, &fp).map_err(err)?;
                    let rec = curvature::classify_shapes(&s, PREDICATE_TOL).map_err(err)?;
                    let b = rec.bounds;
                    let slack = 1e-9 * b.upper;
                    let rho = rec.rho_perp;
                    ensure(rho >= b.lower - slack && rho <= b.upper + slack, || {
                        format!("{} {}: rho {rho} outside [{}, {}]", spec.label(), side.as_str(), b.lower, b.upper)
                    })?;
                    ensure(rho <= b.ddvv + slack, || format!("{}: rho {rho} above DDVV {}", spec.label(), b.ddvv))?;
                    let (a, bb) = s.effective_multiplicities();
                    let applies = 2 * bb >= a + 2;
                    if applies {
                        ensure(rho >= b.refined_lower - slack, || {
                            format!("{}: rho {rho} below {}", spec.label(), b.refined_lower)
                        })?;
                    }
                    Ok((rel(rec.rho_perp_identity, rho), applies))
                })
                .collect();
            for r in results {
                let (id, applies) = r?;
                worst_identity = worst_identity.max(id);
                refined_checks += usize::from(applies);
                n += 1;
            }
        }
    }
    ensure(worst_identity < 1e-8, || format!("identity relative residual {worst_identity:e}"))?;
    Ok(format!("{n} samples, identity {worst_identity:.1e}, refined lower bound checked at {refined_checks}"))
}

fn rho_of(sys: &CliffordSystem, fp: &FocalPoint) -> Result<curvature::CurvatureRecord, String> {
    curvature::classify(sys, fp, PREDICATE_TOL).map_err(err)
}

fn expect_constant(name: &str, sys: &CliffordSystem, side: Side, value: f64, n: usize) -> Result<(), String> {
    for i in 0..n {
        let fp = sample(sys, side, &format!("value:{name}"), i)?;
        let rho = rho_of(sys, &fp)?.rho_perp;
        ensure(rel(rho, value) < 1e-6, || format!("{name}: rho {rho}, expected {value}"))?;
    }
    Ok(())
}

fn attainment_a() -> Outcome {
    expect_constant("(1,2)+", &clifford::build_system(1, 4).map_err(err)?, Side::Plus, 32.0, 10)?;
    let s11 = clifford::build_system(1, 3).map_err(err)?;
    expect_constant("(1,1)+", &s11, Side::Plus, 16.0, 10)?;
    ensure(curvature::bounds(1, 1).ddvv == 16.0, || "DDVV bound for (1,1) is not 16".into())?;

    let s34 = clifford::build_system(3, 2).map_err(err)?;
    let s78 = clifford::build_octonionic_m7(1).map_err(err)?;
    for i in 0..10 {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut r = rng::stream(SEED, "attain:locus", i);
        let fp = loci::sample_ca_m3(&s34, sign, &mut r).map_err(err)?;
        let rho = rho_of(&s34, &fp)?.rho_perp;
        ensure(rel(rho, 384.0) < 1e-6, || format!("(3,4) eigensphere rho {rho}"))?;
        let fp = loci::sample_psi(&s78, sign, &mut r).map_err(err)?;
        let rho = rho_of(&s78, &fp)?.rho_perp;
        ensure(rel(rho, 3584.0) < 1e-6, || format!("(7,8) Psi-point rho {rho}"))?;
    }
    let mut margin = f64::INFINITY;
    for (name, sys) in [("(3,4)", &s34), ("(7,8)", &s78)] {
        for i in 0..20 {
            let fp = sample(sys, Side::Plus, &format!("attain:generic:{name}"), i)?;
            let rec = rho_of(sys, &fp)?;
            margin = margin.min(rec.bounds.upper - rec.rho_perp);
        }
    }
    ensure(margin > 0.1, || format!("generic sample within {margin} of the upper bound"))?;
    Ok(format!("32, 16, 384, 3584 attained; generic margin {margin:.2}"))
}

fn attainment_p() -> Outcome {
    expect_constant("(2,1)+", &clifford::build_system(2, 2).map_err(err)?, Side::Plus, 12.0, 10)?;
    expect_constant("(6,1)+", &clifford::build_system(6, 1).map_err(err)?, Side::Plus, 84.0, 10)?;
    let d43 = clifford::definite_system(4, 2).map_err(err)?;
    for i in 0..10 {
        let fp = sample(&d43, Side::Plus, "parallel:(4,3)D", i)?;
        let rec = rho_of(&d43, &fp)?;
        ensure(rel(rec.rho_perp, 120.0) < 1e-6 && rec.cond_p.holds && rec.cond_e.holds, || {
            format!("(4,3)D: rho {} condP {} condE {}", rec.rho_perp, rec.cond_p.holds, rec.cond_e.holds)
        })?;
    }
    for k in 3..=5 {
        let sys = clifford::build_system(1, k).map_err(err)?;
        let (m1, m2) = sys.multiplicities();
        let want = (2 * m2 * m1 * (m2 + 1)) as f64;
        expect_constant(&format!("(1,{m2})-"), &sys, Side::Minus, want, 10)?;
    }
    Ok("12, 84, 120 (with Einstein), and the M- lower bound for (1,1), (1,2), (1,3)".into())
}

fn minus_machinery() -> Outcome {
    let systems = [
        ("(1,2)", clifford::build_system(1, 4).map_err(err)?),
        ("(2,1)", clifford::build_system(2, 2).map_err(err)?),
        ("(3,4)", clifford::build_system(3, 2).map_err(err)?),
        ("(4,3)D", clifford::definite_system(4, 2).map_err(err)?),
        ("(4,3)I", clifford::indefinite_system(4).map_err(err)?),
        ("(6,1)", clifford::build_system(6, 1).map_err(err)?),
        ("(7,8)", clifford::build_octonionic_m7(1).map_err(err)?),
        ("(8,7)I", clifford::build_indefinite_m8()),
    ];
    let (mut fd, mut spec, mut angle) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (name, sys) in &systems {
        for i in 0..4 {
            let fp = sample(sys, Side::Minus, &format!("minus:{name}"), i)?;
            let (alg, diff) = focal::cross_check_mminus(sys, &fp).map_err(err)?;
            fd = fd.max(diff);
            spec = spec.max(alg.spectrum_residual().map_err(err)?);
            for (a, s) in alg.mats.iter().enumerate() {
                let k = focal::ambient_kernel(s, &fp.tangent);
                let want = focal::mminus_kernel(&fp, &fp.normals.column(a).into_owned());
                angle = angle.max(linalg::max_principal_angle(&k, &want));
            }
        }
    }
    ensure(fd < 1e-4, || format!("FD disagreement {fd:e}"))?;
    ensure(spec < 1e-6, || format!("M- spectrum residual {spec:e}"))?;
    ensure(angle < 1e-4, || format!("kernel angle {angle:e}"))?;

    // Congruent pairs: rho is the same function of <Px, x> on both.
    let s34 = &systems[2].1;
    let i43 = &systems[4].1;
    let mut fit = 0.0_f64;
    for (sys, side) in [(s34, Side::Plus), (i43, Side::Minus)] {
        let p = sys.product_matrix();
        for i in 0..20 {
            let fp = sample(sys, side, &format!("congruence:{}", side.as_str()), i)?;
            let h = fp.x.dot(&(&p * &fp.x));
            fit = fit.max(rel(rho_of(sys, &fp)?.rho_perp, 240.0 + 144.0 * h * h));
        }
    }
    ensure(fit < 1e-8, || format!("congruent rho profiles differ by {fit:e}"))?;
    expect_constant("(4,3)I+", i43, Side::Plus, 264.0, 10)?;
    expect_constant("(3,4)-", s34, Side::Minus, 264.0, 10)?;

    let d43 = &systems[3].1;
    let i87 = &systems[7].1;
    for i in 0..4 {
        let fp = sample(d43, Side::Minus, "upper:(4,3)D", i)?;
        let s = focal::shape_ops_mminus(d43, &fp, ShapeMethod::FiniteDifference).map_err(err)?;
        let rho = curvature::rho_perp(&s);
        ensure(rel(rho, 384.0) < 1e-3, || format!("(4,3)D M- rho {rho}"))?;
        let mut r = rng::stream(SEED, "upper:(8,7)I", i as u64);
        let fp = loci::sample_ca_i(i87, if i % 2 == 0 { 1.0 } else { -1.0 }, &mut r).map_err(err)?;
        let s = focal::shape_ops_mminus(i87, &fp, ShapeMethod::FiniteDifference).map_err(err)?;
        let rho = curvature::rho_perp(&s);
        ensure(rel(rho, 3584.0) < 1e-3, || format!("(8,7)I C_A rho {rho}"))?;
    }
    Ok(format!(
        "FD {fd:.1e}, spectrum {spec:.1e}, kernel angle {angle:.1e}, congruence {fit:.1e}; 384 and 3584 attained"
    ))
}

fn set_identities() -> Outcome {
    let base = clifford::build_indefinite_m8();
    let dual = clifford::dualize(&base).map_err(err)?;
    let p9 = clifford::extend_by_one(&base).map_err(err)?;
    let mut member = 0.0_f64;
    for i in 0..20 {
        let mut r = rng::stream(SEED, "sets:eigen", i);
        let fp = loci::sample_ca_i(&base, if i % 2 == 0 { 1.0 } else { -1.0 }, &mut r).map_err(err)?;
        member = member.max(focal::mminus_residual(&base, &fp.x)).max(focal::mminus_residual(&dual, &fp.x));
    }
    ensure(member < 1e-12, || format!("E+-(P) membership residual {member:e}"))?;
    let mut crit = 0.0_f64;
    for i in 0..10 {
        let mut r = rng::stream(SEED, "sets:ca-d", i);
        let fp = loci::sample_ca_d(&base, &dual, &p9, &mut r).map_err(err)?;
        crit = crit.max(loci::ca_definite_residual(&base.product_matrix(), &p9, &fp.x));
        let s = focal::shape_ops_mminus(&dual, &fp, ShapeMethod::FiniteDifference).map_err(err)?;
        let rec = curvature::classify_shapes(&s, 1e-3).map_err(err)?;
        ensure(rec.cond_a.holds, || format!("C_A^D sample fails Condition A: {:?}", rec.cond_a))?;
    }
    ensure(crit < 1e-10, || format!("extension criterion residual {crit:e}"))?;
    Ok(format!("membership {member:.1e}, criterion {crit:.1e}, Condition A on 10 samples"))
}

fn emptiness_scans() -> Outcome {
    let s78 = clifford::build_octonionic_m7(1).map_err(err)?;
    let mut g_max = 0.0_f64;
    let mut big_min = f64::INFINITY;
    for i in 0..20 {
        let fp = sample(&s78, Side::Plus, "scan:(7,8)", i)?;
        let sc = loci::einstein_scan(&s78, &fp).map_err(err)?;
        g_max = g_max.max(sc.g);
        big_min = big_min.min(sc.big_g);
    }
    ensure(g_max < 1e-10 && big_min >= 1.0 - 1e-12, || format!("(7,8): g {g_max:e}, G {big_min}"))?;

    let i87 = clifford::build_indefinite_m8();
    let tail = i87.matrices()[1..].iter().fold(DMatrix::<f64>::identity(32, 32), |acc, p| acc * p);
    let (mut f_dev, mut g87) = (0.0_f64, f64::INFINITY);
    for i in 0..20 {
        let fp = sample(&i87, Side::Plus, "scan:(8,7)I", i)?;
        let x0 = loci::normalized_tangential(&tail, &fp.x).ok_or("eigenvector sample")?;
        f_dev = f_dev.max((loci::einstein_form(&i87, &fp.x, &x0) - 1.0).abs());
        g87 = g87.min(loci::einstein_scan(&i87, &fp).map_err(err)?.big_g);
    }
    ensure(f_dev < 1e-9 && g87 > 1.1, || format!("(8,7)I: |f - 1| {f_dev:e}, G {g87}"))?;

    let s10 = clifford::build_system(10, 1).map_err(err)?;
    let mut gap = f64::INFINITY;
    for i in 0..10 {
        let fp = sample(&s10, Side::Plus, "scan:(10,21)", i)?;
        let sc = loci::einstein_scan(&s10, &fp).map_err(err)?;
        gap = gap.min(sc.big_g - sc.g);
    }
    ensure(gap > 0.1, || format!("(10,21): G - g = {gap}"))?;
    Ok(format!("(7,8) g {g_max:.1e}, G >= {big_min:.2}; (8,7)I |f-1| {f_dev:.1e}, G >= {g87:.2}; (10,21) gap {gap:.2}"))
}

fn isoparametric() -> Outcome {
    let levels = [0.0, -0.3, 0.3, -0.7, 0.7];
    let mut n = 0;
    for domain in [Domain::Indefinite, Domain::Definite] {
        let (rows, errors) = report::isofun_rows(domain, 50, &levels, SEED).map_err(err)?;
        ensure(errors.is_empty(), || errors.join("; "))?;
        for r in &rows {
            ensure(r.verdict == "pass", || format!("{} {}: residual {:e}", r.family, r.locus, r.max_residual))?;
        }
        n += rows.len();
    }
    Ok(format!("{n} checks over h and its dual on 5 levels"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let rep = report::pipeline(report::DEFAULT_SAMPLES, SEED, d).map_err(err)?;
        ensure(rep.passed(), || rep.first_failure().unwrap_or_default())?;
    }
    for t in ["table1.csv", "table2.csv"] {
        let (x, y) = (std::fs::read(a.join(t)).map_err(err)?, std::fs::read(b.join(t)).map_err(err)?);
        ensure(x == y, || format!("{t} differs between runs"))?;
    }
    Ok("two pipeline runs give byte-identical tables".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("octonion algebra", algebra),
        ("Clifford constructions", construction),
        ("M+ shape operator spectra", spectra),
        ("normal scalar curvature bounds", bounds),
        ("Condition A attainment", attainment_a),
        ("parallel attainment", attainment_p),
        ("M- shape operators", minus_machinery),
        ("eigenspace and extension set identities", set_identities),
        ("Einstein emptiness scans", emptiness_scans),
        ("isoparametric function identities", isoparametric),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
