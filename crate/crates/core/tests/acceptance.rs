//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::time::Instant;

use dec2d::geometry::{classify_mesh, radius_ratio_bound, QualityTolerances, TriangleGeometry};
use dec2d::mesh::family::{criss_cross_lattice, embedded_degenerate_pair, equilateral_lattice, triangle_pair};
use dec2d::mesh::{generate_family, Cochain, Domain, FamilyKind, SimplicialComplex2};
use dec2d::norms::inner_product;
use dec2d::solver::{infsup_constant, HarmonicChoice};
use dec2d::study::{parse_family, run_study, StudyConfig, StudyKind, StudyResult};
use dec2d::{Discretization, Flavor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Check = fn() -> Outcome;

fn study(kind: StudyKind, family: &str, levels: usize, ks: &[usize]) -> Result<StudyResult, String> {
    let spec = parse_family(family, levels, 1).map_err(|e| e.to_string())?;
    let mut config = StudyConfig::new(kind, spec);
    config.ks = ks.to_vec();
    config.samples = 200;
    run_study(&config).map_err(|e| e.to_string())
}

fn values(result: &StudyResult, metric: &str) -> Vec<f64> {
    result.series(metric).into_iter().map(|p| p.1).collect()
}

fn slope(result: &StudyResult, metric: &str) -> f64 {
    result.slope(metric).and_then(|s| s.slope).unwrap_or(f64::NAN)
}

/// Largest relative change between consecutive entries.
fn drift(v: &[f64]) -> f64 {
    v.windows(2).map(|w| ((w[1] - w[0]) / w[0]).abs()).fold(0.0, f64::max)
}

fn lumping() -> Outcome {
    let meshes = common::delaunay_meshes();
    let obtuse = meshes.iter().filter(|(_, c)| common::has_obtuse(c)).count();
    let (mut star, mut stiff) = (0.0f64, 0.0f64);
    for (_, c) in meshes.iter() {
        let disc = Discretization::new(c.clone()).map_err(|e| e.to_string())?;
        let check = disc.lumping_check();
        star = star.max(check.max_relative_difference);
        let d0 = disc.coboundary(0).unwrap();
        let k = disc.mass(1, Flavor::Feec).unwrap().matrix.congruence(d0);
        let quad = dec2d::operators::scalar_stiffness(c);
        stiff = stiff.max(k.add_scaled(&quad, -1.0).max_abs() / quad.max_abs()).max(check.stiffness_relative_difference);
    }
    Ok((
        meshes.len() >= 5 && obtuse >= 1 && star <= 1e-12 && stiff <= 1e-12,
        format!("{} meshes ({obtuse} with obtuse angles), star1 vs lumped {star:.1e}, stiffness {stiff:.1e}", meshes.len()),
    ))
}

fn oracles() -> Outcome {
    let (mut mass, mut dual, mut dd) = (0.0f64, 0.0f64, 0.0f64);
    for (_, c) in common::all_meshes() {
        let (q0, q1) = common::quadrature_masses(&c);
        let (area, ratio) = common::polygon_dual(&c);
        let disc = Discretization::new(c).map_err(|e| e.to_string())?;
        for (k, q) in [(0, q0), (1, q1)] {
            let m = &disc.mass(k, Flavor::Feec).unwrap().matrix;
            let scale = m.max_abs();
            for (i, row) in q.iter().enumerate() {
                for (j, want) in row.iter().enumerate() {
                    mass = mass.max((m.get(i, j) - want).abs() / scale);
                }
            }
        }
        for (v, want) in area.iter().enumerate() {
            dual = dual.max((disc.duals.vertex_area[v] - want).abs() / want.abs().max(1e-3));
        }
        for (e, want) in ratio.iter().enumerate() {
            dual = dual.max((disc.duals.edge_ratio[e] - want).abs() / want.abs().max(1.0));
        }
        dd = dd.max(disc.coboundary(1).unwrap().matmul(disc.coboundary(0).unwrap()).max_abs());
    }
    Ok((mass <= 1e-10 && dual <= 1e-10 && dd == 0.0, format!("mass {mass:.1e}, duals {dual:.1e}, d1d0 {dd:.0e}")))
}

fn acute_norms() -> Outcome {
    let family = "equilateral,perturbation=0.05,base=3";
    let spec = parse_family(family, 4, 1).map_err(|e| e.to_string())?;
    let acute = generate_family(&spec)
        .map_err(|e| e.to_string())?
        .iter()
        .all(|l| classify_mesh(&l.complex, &QualityTolerances::default()).flags.uniformly_acute);
    let r = study(StudyKind::Norms, family, 4, &[0, 1, 2])?;
    let basis = values(&r, "k1.basis_ratio_max").into_iter().fold(0.0, f64::max);
    let (lo, hi) = (values(&r, "k1.ratio_min"), values(&r, "k1.ratio_max"));
    let drift1 = drift(&lo).max(drift(&hi));
    let local_lo = values(&r, "k0.local_ratio_min").into_iter().fold(f64::INFINITY, f64::min);
    let local_hi = values(&r, "k0.local_ratio_max").into_iter().fold(0.0, f64::max);
    let k2 = values(&r, "k2.ratio_min").into_iter().chain(values(&r, "k2.ratio_max")).map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    Ok((
        acute && basis <= 2.0 && drift1 <= 0.15 && local_lo >= 0.75 && local_hi <= 6.0 && k2 <= 1e-12,
        format!(
            "uniformly acute {acute}, k1 basis max {basis:.3}, k1 endpoint drift {:.1}%, k0 local [{local_lo:.3}, {local_hi:.3}], k2 |ratio-1| {k2:.0e}",
            100.0 * drift1
        ),
    ))
}

fn counterexample() -> Outcome {
    let r = study(StudyKind::Counterexample, "square", 1, &[1])?;
    let s = slope(&r, "dec_norm_sq");
    let f = values(&r, "feec_norm_sq");
    let (fmin, fmax) = f.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    let var = (fmax - fmin) / fmin;
    Ok(((s - 1.0).abs() <= 0.1 && var < 0.1, format!("DEC slope {s:.4}, FEEC variation {:.2}%", 100.0 * var)))
}

fn single_triangle_identities() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let pts: Vec<[f64; 2]> = (0..3).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let Ok(c) = SimplicialComplex2::from_planar(&pts, &[[0, 1, 2]]) else { continue };
        let Ok(disc) = Discretization::new(c) else { continue };
        let one = Cochain { degree: 0, values: vec![1.0; 3] };
        let f: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d0 = disc.coboundary(0).unwrap();
        let (a, b) = (Cochain { degree: 1, values: d0.apply(&f) }, Cochain { degree: 1, values: d0.apply(&g) });
        for (u, v) in [(&one, &one), (&a, &b)] {
            let dec = inner_product(&disc, u, v, Flavor::Dec, false).unwrap().value;
            let feec = inner_product(&disc, u, v, Flavor::Feec, false).unwrap().value;
            let scale = inner_product(&disc, u, u, Flavor::Feec, false).unwrap().value.max(inner_product(&disc, v, v, Flavor::Feec, false).unwrap().value);
            worst = worst.max((dec - feec).abs() / scale);
        }
    }
    worst
}

fn ip_consistency() -> Outcome {
    let r = study(StudyKind::IpError, "square,perturbation=0.2,base=4", 4, &[0, 1, 2])?;
    let (s0, s1) = (slope(&r, "k0.sup"), slope(&r, "k1.sup"));
    let k2_zero = r.slope("k2.sup").is_some_and(|s| s.is_exact());
    let single = single_triangle_identities();
    Ok((
        s0 >= 0.9 && s1 >= 0.9 && k2_zero && single <= 1e-12,
        format!("sup slopes k0 {s0:.3}, k1 {s1:.3}; k2 identically zero {k2_zero}; single-triangle constant/closed gap {single:.0e}"),
    ))
}

fn convergence() -> Outcome {
    let r = study(StudyKind::Converge, "square", 4, &[0, 1, 2])?;
    let s: Vec<f64> = (0..3).map(|k| slope(&r, &format!("k{k}.total_diff"))).collect();
    Ok((s.iter().all(|v| *v >= 0.9), format!("total difference slopes k0 {:.3}, k1 {:.3}, k2 {:.3}", s[0], s[1], s[2])))
}

fn harmonics() -> Outcome {
    let r = study(StudyKind::Harmonics, "annulus,base=4", 4, &[1])?;
    let dims_ok = ["k1.dim_dec", "k1.dim_feec", "k1.image_rank"].iter().all(|m| {
        let v = values(&r, m);
        v.len() == 4 && v.iter().all(|d| *d == 1.0)
    });
    let gap = values(&r, "k1.pi_gap").into_iter().fold(0.0, f64::max);
    // Closed forms have equal DEC and FEEC inner products triangle by
    // triangle, so the gap is roundoff rather than O(h).
    Ok((
        dims_ok && gap <= 1e-10,
        format!("dimensions 1/1 with rank 1 at all levels {dims_ok}; largest gap {gap:.1e} (identity, stronger than O(h))"),
    ))
}

fn stability() -> Outcome {
    let r = study(StudyKind::Constants, "square,base=2", 4, &[0, 1, 2])?;
    let mut ok = true;
    let mut notes = Vec::new();
    let metrics = ["k0.dec.poincare", "k1.dec.poincare", "k0.dec.infsup", "k1.dec.infsup", "k2.dec.infsup", "k0.feec.infsup", "k1.feec.infsup", "k2.feec.infsup"];
    for m in metrics {
        let v = values(&r, m);
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        ok &= v.len() == 4 && lo > 0.0 && lo >= 0.5 * hi;
    }
    notes.push(format!("regular family spread within 50% {ok}"));
    let mut gammas = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let disc = Discretization::new(embedded_degenerate_pair(eps).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        gammas.push(infsup_constant(&disc, 1, Flavor::Dec, HarmonicChoice::Own, Flavor::Dec).map_err(|e| e.to_string())?);
    }
    let decreasing = gammas.windows(2).all(|w| w[1] < w[0]) && gammas[3] < 0.1 * gammas[0];
    notes.push(format!("degenerating family gamma {:?} decreasing to 0 {decreasing}", gammas.iter().map(|g| (g * 1000.0).round() / 1000.0).collect::<Vec<_>>()));
    Ok((ok && decreasing, notes.join("; ")))
}

fn quality() -> Outcome {
    let tol = QualityTolerances::default();
    let eq = classify_mesh(&equilateral_lattice(6).map_err(|e| e.to_string())?, &tol).flags;
    let eq_ok = eq.acute && eq.uniformly_acute && eq.boundary_acute && eq.uniformly_boundary_acute && eq.delaunay && eq.nondegenerate_delaunay && eq.uniformly_delaunay && eq.shape_regular && eq.dec_regular && eq.curvature_bounded;
    let cc = classify_mesh(&criss_cross_lattice(4).map_err(|e| e.to_string())?, &tol).flags;
    let cc_ok = cc.delaunay && !cc.nondegenerate_delaunay;
    let pair = classify_mesh(&triangle_pair(100f64.to_radians(), 95f64.to_radians()).map_err(|e| e.to_string())?, &tol).flags;
    let saddle = classify_mesh(&common::level(Domain::SurfaceSaddle, FamilyKind::StructuredPerturbed, 0.0, 1, 6), &tol);
    let saddle_ok = saddle.curvature_constant > 0.0 && saddle.curvature_constant.is_finite();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for _ in 0..100_000 {
        let p: [[f64; 3]; 3] = std::array::from_fn(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0]);
        let g = TriangleGeometry::new(&p);
        if g.area <= 1e-12 {
            continue;
        }
        let sc = g.shape_constants();
        if sc.radius_ratio < radius_ratio_bound(sc.min_angle) * (1.0 - 1e-9) {
            violations += 1;
        }
    }
    Ok((
        eq_ok && cc_ok && !pair.delaunay && saddle_ok && violations == 0,
        format!(
            "equilateral all flags {eq_ok}, criss-cross delaunay/degenerate {cc_ok}, obtuse pair non-Delaunay {}, saddle curvature constant {:.4}, r/R bound violations {violations} of 1e5",
            !pair.delaunay, saddle.curvature_constant
        ),
    ))
}

fn main() {
    let criteria: [(&str, &str, Check); 9] = [
        ("AC1", "lumping identity", lumping),
        ("AC2", "oracle equivalence", oracles),
        ("AC3", "acute norm equivalence", acute_norms),
        ("AC4", "counterexample", counterexample),
        ("AC5", "inner-product consistency", ip_consistency),
        ("AC6", "solution convergence", convergence),
        ("AC7", "harmonic comparison", harmonics),
        ("AC8", "stability tracking", stability),
        ("AC9", "quality classification", quality),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("[{}] {id} {name}: {detail} ({:.1}s)", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
