//! Parameter sweeps over mesh families, producing (h, metric, value) tables.

mod report;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{emit_report, fit_slopes, OutputFormat, Provenance, Row, Slope, StudyResult, MIN_SLOPE_LEVELS};

use crate::error::{Error, Result};
use crate::geometry::{classify_mesh, QualityTolerances};
use crate::hodge::{harmonic_basis, pi_h_map, pi_h_rank};
use crate::mesh::{generate_family, AnalyticForm, Domain, FamilyKind, FamilySpec, MeshLevel};
use crate::norms::{degenerate_pair_counterexample, ip_discrepancy_study, norm_equivalence_constants};
use crate::operators::{Discretization, Flavor, Positivity};
use crate::solver::{infsup_constant, poincare_constant, solve_hodge_laplace, HarmonicChoice, SolveOptions, Source};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    Quality,
    Norms,
    IpError,
    Counterexample,
    Harmonics,
    Constants,
    Converge,
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).map_err(|_| Error::UnknownStudy(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub family: FamilySpec,
    pub ks: Vec<usize>,
    pub flavors: Vec<Flavor>,
    pub samples: usize,
    pub seed: u64,
    /// Opposite-angle gaps for the counterexample study.
    pub eps_list: Vec<f64>,
    pub harmonic: HarmonicChoice,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// Geometric sequence from 10⁻¹ down to 10⁻⁴, three points per decade.
pub fn default_eps_list() -> Vec<f64> {
    (0..10).map(|i| 10f64.powf(-1.0 - i as f64 / 3.0)).collect()
}

impl StudyConfig {
    pub fn new(study: StudyKind, family: FamilySpec) -> Self {
        let seed = family.seed;
        Self {
            study,
            family,
            ks: vec![0, 1, 2],
            flavors: vec![Flavor::Dec, Flavor::Feec],
            samples: 1000,
            seed,
            eps_list: default_eps_list(),
            harmonic: HarmonicChoice::Own,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    /// Checks every field, naming the offending one in the error.
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::SpecInvalid(msg));
        self.family.validate().map_err(|e| Error::SpecInvalid(format!("family: {e}")))?;
        if self.ks.is_empty() {
            return invalid("k: at least one degree is required".into());
        }
        if let Some((i, k)) = self.ks.iter().enumerate().find(|(_, &k)| k > 2) {
            return invalid(format!("k[{i}]: degree {k} is not 0, 1 or 2"));
        }
        if self.flavors.is_empty() {
            return invalid("flavor: at least one flavor is required".into());
        }
        if self.samples == 0 && matches!(self.study, StudyKind::Norms | StudyKind::IpError) {
            return invalid("samples: must be positive".into());
        }
        if self.study == StudyKind::Counterexample {
            if self.eps_list.is_empty() {
                return invalid("eps: at least one value is required".into());
            }
            for (i, &e) in self.eps_list.iter().enumerate() {
                if !(e > 0.0 && e < PI) {
                    return invalid(format!("eps[{i}]: {e} outside (0, π)"));
                }
                if i > 0 && e >= self.eps_list[i - 1] {
                    return invalid(format!("eps[{i}]: values must be strictly decreasing"));
                }
            }
        }
        Ok(())
    }
}

/// Parses `domain[,kind][,key=value...]`, e.g.
/// `square,structured_perturbed,perturbation=0.2,base=4,min_angle=20`.
pub fn parse_family(text: &str, levels: usize, seed: u64) -> Result<FamilySpec> {
    let mut parts = text.split(',').map(str::trim).filter(|s| !s.is_empty());
    let domain = match parts.next() {
        Some("square") => Domain::Square,
        Some("annulus") => Domain::Annulus,
        Some("surface_saddle") | Some("saddle") => Domain::SurfaceSaddle,
        Some("equilateral") => Domain::Equilateral,
        other => return Err(Error::SpecInvalid(format!("family.domain: unknown domain {other:?}"))),
    };
    let mut kind = FamilyKind::StructuredPerturbed;
    let mut perturbation = 0.2;
    let mut base = None;
    let mut min_angle: Option<Option<f64>> = None;
    for part in parts {
        let number = |v: &str, field: &str| -> Result<f64> {
            v.parse::<f64>().map_err(|_| Error::SpecInvalid(format!("family.{field}: cannot parse {v:?}")))
        };
        match part.split_once('=') {
            None => {
                kind = match part {
                    "structured_perturbed" | "structured" => FamilyKind::StructuredPerturbed,
                    "random_delaunay" | "random" => FamilyKind::RandomDelaunay,
                    _ => return Err(Error::SpecInvalid(format!("family.kind: unknown kind {part:?}"))),
                }
            }
            Some(("perturbation", v)) => perturbation = number(v, "perturbation")?,
            Some(("base", v)) => base = Some(number(v, "base")? as usize),
            Some(("min_angle", "none")) => min_angle = Some(None),
            Some(("min_angle", v)) => min_angle = Some(Some(number(v, "min_angle")?)),
            Some((key, _)) => return Err(Error::SpecInvalid(format!("family.{key}: unknown key"))),
        }
    }
    let mut spec = FamilySpec::new(domain, kind, levels, perturbation, seed);
    if let Some(b) = base {
        spec = spec.with_base_resolution(b);
    }
    if let Some(m) = min_angle {
        spec = spec.with_min_angle(m);
    }
    spec.validate()?;
    Ok(spec)
}

/// Manufactured right-hand sides used by the convergence study.
///
/// k = 0: f = 2π² cos πx cos πy, whose Neumann solution is cos πx cos πy.
/// k = 1: the vector field (sin πy, cos πx). k = 2: sin πx sin πy.
pub fn manufactured_source(k: usize) -> Result<AnalyticForm> {
    Ok(match k {
        0 => AnalyticForm::zero(|p| 2.0 * PI * PI * (PI * p[0]).cos() * (PI * p[1]).cos()),
        1 => AnalyticForm::one(|p| [(PI * p[1]).sin(), (PI * p[0]).cos(), 0.0]),
        2 => AnalyticForm::two(|p| (PI * p[0]).sin() * (PI * p[1]).sin()),
        _ => return Err(Error::InvalidDegree(k)),
    })
}

/// Exact solution of the k = 0 manufactured problem.
pub fn manufactured_scalar_solution(p: [f64; 3]) -> f64 {
    (PI * p[0]).cos() * (PI * p[1]).cos()
}

fn row(h: f64, metric: impl Into<String>, value: f64) -> Row {
    Row { h, metric: metric.into(), value }
}

fn require_dec_regular(level: &MeshLevel) -> Result<()> {
    let report = classify_mesh(&level.complex, &QualityTolerances::default());
    if report.flags.dec_regular {
        return Ok(());
    }
    let v = &report.violations;
    Err(Error::FamilyNotDecRegular(format!(
        "level {}: non-Delaunay edges {:?}, cocircular edges {:?}, small-angle triangles {:?}",
        level.level, v.non_delaunay_edges, v.cocircular_edges, v.small_angle_triangles
    )))
}

fn require_positive_star(disc: &Discretization, k: usize) -> Result<()> {
    match disc.mass(k, Flavor::Dec)?.positivity {
        Positivity::PositiveDefinite => Ok(()),
        _ => Err(Error::IndefiniteStar(k)),
    }
}

/// Runs the configured study.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    config.validate()?;
    let rows = match config.study {
        StudyKind::Counterexample => degenerate_pair_counterexample(&config.eps_list)?
            .into_iter()
            .flat_map(|r| {
                [row(r.eps, "dec_norm_sq", r.dec_norm_sq), row(r.eps, "feec_norm_sq", r.feec_norm_sq), row(r.eps, "ratio", r.ratio)]
            })
            .collect(),
        StudyKind::IpError => {
            let family = generate_family(&config.family)?;
            let mut rows = Vec::new();
            for &k in &config.ks {
                for r in ip_discrepancy_study(&family, k, config.samples, config.seed)? {
                    rows.push(row(r.h, format!("k{k}.sampled"), r.sampled_max));
                    rows.push(row(r.h, format!("k{k}.sup"), r.exact_sup));
                }
            }
            rows
        }
        _ => {
            let levels: Vec<usize> = (0..config.family.levels).collect();
            let per_level: Vec<Result<Vec<Row>>> = levels
                .par_iter()
                .map(|&l| {
                    let level = crate::mesh::family::generate_level(&config.family, l)?;
                    run_level(config, &level).map_err(|e| match e {
                        Error::SolveFailure(msg) => Error::SolveFailure(format!("level {l}: {msg}")),
                        other => other,
                    })
                })
                .collect();
            let mut rows = Vec::new();
            for r in per_level {
                rows.extend(r?);
            }
            rows
        }
    };
    Ok(StudyResult::new(rows, config.clone()))
}

fn run_level(config: &StudyConfig, level: &MeshLevel) -> Result<Vec<Row>> {
    let h = level.h;
    let mut rows = Vec::new();
    match config.study {
        StudyKind::Quality => {
            let q = classify_mesh(&level.complex, &QualityTolerances::default());
            for (name, value) in [
                ("n_triangles", level.complex.n_triangles() as f64),
                ("delta0", q.delta0),
                ("delta_pi", q.delta_pi),
                ("delta_pi2", q.delta_pi2),
                ("acute_margin", q.acute_margin),
                ("min_delta_t", q.min_delta_t),
                ("curvature_constant", q.curvature_constant),
                ("max_valence", q.max_valence as f64),
            ] {
                rows.push(row(h, name, value));
            }
            let f = q.flags;
            for (name, flag) in [
                ("acute", f.acute),
                ("uniformly_acute", f.uniformly_acute),
                ("boundary_acute", f.boundary_acute),
                ("uniformly_boundary_acute", f.uniformly_boundary_acute),
                ("delaunay", f.delaunay),
                ("nondegenerate_delaunay", f.nondegenerate_delaunay),
                ("uniformly_delaunay", f.uniformly_delaunay),
                ("shape_regular", f.shape_regular),
                ("dec_regular", f.dec_regular),
                ("curvature_bounded", f.curvature_bounded),
            ] {
                rows.push(row(h, format!("flag.{name}"), if flag { 1.0 } else { 0.0 }));
            }
        }
        StudyKind::Norms => {
            let disc = Discretization::new(level.complex.clone())?;
            for &k in &config.ks {
                require_positive_star(&disc, k)?;
                let r = norm_equivalence_constants(&disc, k, config.samples, config.seed.wrapping_add(level.level as u64))?;
                let smin = r.sample_ratios.iter().copied().fold(f64::INFINITY, f64::min);
                let smax = r.sample_ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                for (name, value) in [
                    ("ratio_min", r.ratio_min),
                    ("ratio_max", r.ratio_max),
                    ("sample_min", smin),
                    ("sample_max", smax),
                    ("basis_ratio_max", r.basis_ratio_max),
                    ("local_ratio_min", r.local_ratio_min),
                    ("local_ratio_max", r.local_ratio_max),
                    ("c1_bound", r.c1_bound),
                ] {
                    rows.push(row(h, format!("k{k}.{name}"), value));
                }
            }
        }
        StudyKind::Harmonics => {
            let disc = Discretization::new(level.complex.clone())?;
            for &k in &config.ks {
                let r = pi_h_rank(&disc, k)?;
                rows.push(row(h, format!("k{k}.dim_dec"), r.dec_dimension as f64));
                rows.push(row(h, format!("k{k}.dim_feec"), r.feec_dimension as f64));
                rows.push(row(h, format!("k{k}.image_rank"), r.image_rank as f64));
                if r.dec_dimension > 0 {
                    rows.push(row(h, format!("k{k}.pi_gap"), pi_gap(&disc, k)?));
                }
            }
        }
        StudyKind::Constants => {
            let disc = Discretization::new(level.complex.clone())?;
            for &k in &config.ks {
                for &flavor in &config.flavors {
                    let name = flavor.name();
                    match poincare_constant(&disc, k, flavor) {
                        Ok(c) => rows.push(row(h, format!("k{k}.{name}.poincare"), c)),
                        Err(Error::EmptyComplement(_)) => {}
                        Err(e) => return Err(e),
                    }
                    let g = infsup_constant(&disc, k, flavor, config.harmonic, flavor)?;
                    rows.push(row(h, format!("k{k}.{name}.infsup"), g));
                }
            }
        }
        StudyKind::Converge => {
            require_dec_regular(level)?;
            let disc = Discretization::new(level.complex.clone())?;
            for &k in &config.ks {
                rows.extend(convergence_rows(&disc, k, h, config.harmonic)?);
                if disc.complex.betti_numbers()[k] > 0 {
                    rows.push(row(h, format!("k{k}.pi_gap"), pi_gap(&disc, k)?));
                }
            }
        }
        StudyKind::Counterexample | StudyKind::IpError => unreachable!("handled without per-level dispatch"),
    }
    Ok(rows)
}

/// Largest relative FEEC-norm gap ‖Π_h p̂ − p̂‖ / ‖p̂‖ over a DEC-harmonic basis.
pub fn pi_gap(disc: &Discretization, k: usize) -> Result<f64> {
    let m = &disc.mass(k, Flavor::Feec)?.matrix;
    let mut worst = 0.0f64;
    for p in harmonic_basis(disc, k, Flavor::Dec)?.basis {
        let image = pi_h_map(disc, &p)?;
        let diff: Vec<f64> = image.values.iter().zip(&p.values).map(|(a, b)| a - b).collect();
        worst = worst.max((m.bilinear(&diff, &diff) / m.bilinear(&p.values, &p.values)).sqrt());
    }
    Ok(worst)
}

/// DEC-versus-FEEC differences of the manufactured problem of degree `k`,
/// measured in FEEC norms.
pub fn convergence_rows(disc: &Discretization, k: usize, h: f64, harmonic: HarmonicChoice) -> Result<Vec<Row>> {
    let form = manufactured_source(k)?;
    let options = SolveOptions { harmonic, ..SolveOptions::default() };
    let solve = |flavor| {
        solve_hodge_laplace(disc, k, &Source::Form(&form), flavor, &options).map_err(|e| match e {
            Error::IndefiniteStar(_) => e,
            other => Error::SolveFailure(other.to_string()),
        })
    };
    let dec = solve(Flavor::Dec)?;
    let feec = solve(Flavor::Feec)?;
    let v_norm = |deg: usize, a: &[f64], b: &[f64]| -> Result<f64> {
        let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(disc.graph_gram(deg, Flavor::Feec)?.bilinear(&diff, &diff).sqrt())
    };
    let mut rows = Vec::new();
    let mut total = 0.0;
    if let (Some(s_dec), Some(s_feec)) = (&dec.sigma, &feec.sigma) {
        let d = v_norm(k - 1, &s_dec.values, &s_feec.values)?;
        rows.push(row(h, format!("k{k}.sigma_diff"), d));
        total += d;
    }
    let du = v_norm(k, &dec.u.values, &feec.u.values)?;
    let pdiff: Vec<f64> = dec.p.values.iter().zip(&feec.p.values).map(|(a, b)| a - b).collect();
    let dp = disc.mass(k, Flavor::Feec)?.matrix.bilinear(&pdiff, &pdiff).sqrt();
    rows.push(row(h, format!("k{k}.u_diff"), du));
    rows.push(row(h, format!("k{k}.p_diff"), dp));
    rows.push(row(h, format!("k{k}.total_diff"), total + du + dp));
    if k == 0 {
        let exact: Vec<f64> = disc.complex.coords().iter().map(|&p| manufactured_scalar_solution(p)).collect();
        let err: Vec<f64> = feec.u.values.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let m0 = &disc.mass(0, Flavor::Feec)?.matrix;
        rows.push(row(h, "k0.feec_l2_error", m0.bilinear(&err, &err).sqrt()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_strings() {
        let s = parse_family("annulus,random_delaunay,perturbation=0.1,base=3", 2, 9).unwrap();
        assert_eq!((s.domain, s.kind, s.base_resolution, s.levels, s.seed), (Domain::Annulus, FamilyKind::RandomDelaunay, 3, 2, 9));
        assert!((s.perturbation - 0.1).abs() < 1e-15);
        assert!(matches!(parse_family("torus", 2, 0), Err(Error::SpecInvalid(_))));
        assert!(matches!(parse_family("square,colour=red", 2, 0), Err(Error::SpecInvalid(m)) if m.contains("family.colour")));
    }

    #[test]
    fn unknown_study_name() {
        assert!(matches!("nope".parse::<StudyKind>(), Err(Error::UnknownStudy(_))));
        assert_eq!("ip-error".parse::<StudyKind>().unwrap(), StudyKind::IpError);
    }

    #[test]
    fn validation_names_fields() {
        let family = FamilySpec::new(Domain::Square, FamilyKind::StructuredPerturbed, 2, 0.2, 1);
        let mut c = StudyConfig::new(StudyKind::Norms, family);
        c.ks = vec![0, 3];
        assert!(matches!(c.validate(), Err(Error::SpecInvalid(m)) if m.starts_with("k[1]")));
        c.ks = vec![1];
        c.study = StudyKind::Counterexample;
        c.eps_list = vec![0.1, 0.2];
        assert!(matches!(c.validate(), Err(Error::SpecInvalid(m)) if m.starts_with("eps[1]")));
    }

    #[test]
    fn counterexample_rows_use_eps_as_h() {
        let family = FamilySpec::new(Domain::Square, FamilyKind::StructuredPerturbed, 1, 0.2, 1);
        let mut c = StudyConfig::new(StudyKind::Counterexample, family);
        c.eps_list = vec![0.1, 0.01, 0.001];
        let r = run_study(&c).unwrap();
        assert_eq!(r.rows.len(), 9);
        let slope = r.slope("dec_norm_sq").unwrap().slope.unwrap();
        assert!((slope - 1.0).abs() < 0.01);
    }
}
