//! Experiment configuration: a TOML file with `[params]`, `[grid]`, `[solver]`, `[output]`
//! and one optional block per experiment. Every numeric field is validated on load, and
//! errors carry the line of the offending key.

use std::fmt;
use std::str::FromStr;

use fhs_core::{bubble::MIN_TOL, make_log_grid, Params, RadialGrid, DEFAULT_NODES, DEFAULT_R_MAX, DEFAULT_R_MIN};
use serde::{Deserialize, Serialize};
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    SolveBubble,
    Spectrum,
    InteractionSweep,
    CutoffSweep,
    KpvSweep,
    StabilitySweep,
    Project,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::SolveBubble,
        Experiment::Spectrum,
        Experiment::InteractionSweep,
        Experiment::CutoffSweep,
        Experiment::KpvSweep,
        Experiment::StabilitySweep,
        Experiment::Project,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::SolveBubble => "solve-bubble",
            Experiment::Spectrum => "spectrum",
            Experiment::InteractionSweep => "interaction-sweep",
            Experiment::CutoffSweep => "cutoff-sweep",
            Experiment::KpvSweep => "kpv-sweep",
            Experiment::StabilitySweep => "stability-sweep",
            Experiment::Project => "project",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Text,
}

/// A validation failure, with the 1-based line of the offending key when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    experiment: Option<Spanned<String>>,
    seed: Option<Spanned<u64>>,
    params: Option<Spanned<RawParams>>,
    grid: Option<Spanned<RawGrid>>,
    solver: Option<RawSolver>,
    output: Option<RawOutput>,
    spectrum: Option<RawSpectrum>,
    interaction: Option<RawInteraction>,
    cutoff: Option<RawCutoff>,
    kpv: Option<RawKpv>,
    stability: Option<RawStability>,
    project: Option<Spanned<RawProject>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    #[serde(rename = "N")]
    n: Spanned<u32>,
    s: Spanned<f64>,
    t: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    r_min: Option<Spanned<f64>>,
    r_max: Option<Spanned<f64>>,
    n: Option<Spanned<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    format: Option<Format>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    k: Option<Spanned<usize>>,
    lambda: Option<Spanned<f64>>,
    gap_samples: Option<Spanned<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    pairs: Option<Spanned<Vec<(f64, f64)>>>,
    qs: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCutoff {
    inner: Option<Spanned<f64>>,
    ratios: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKpv {
    pairs: Option<Spanned<usize>>,
    lambdas: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStability {
    nu: Option<Spanned<usize>>,
    kappas: Option<Spanned<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProject {
    scales: Option<Spanned<Vec<f64>>>,
    coeffs: Option<Spanned<Vec<f64>>>,
    perturbation: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsConfig {
    #[serde(rename = "N")]
    pub dim: u32,
    pub s: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumConfig {
    pub k: usize,
    pub lambda: f64,
    pub gap_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionConfig {
    /// `(α, β)` exponent pairs; defaults to `(p, 1)` and `(crit/2, crit/2)`.
    pub pairs: Vec<(f64, f64)>,
    pub qs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffConfig {
    pub inner: f64,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpvConfig {
    pub pairs: usize,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityConfig {
    pub nu: usize,
    pub kappas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectConfig {
    pub scales: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub perturbation: f64,
}

/// Validated configuration. Absent blocks take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub tol: f64,
    pub format: Format,
    pub spectrum: SpectrumConfig,
    pub interaction: InteractionConfig,
    pub cutoff: CutoffConfig,
    pub kpv: KpvConfig,
    pub stability: StabilityConfig,
    pub project: ProjectConfig,
}

/// `count` points log-uniform from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, span: std::ops::Range<usize>) -> usize {
        let end = span.start.min(self.0.len());
        self.0[..end].bytes().filter(|&b| b == b'\n').count() + 1
    }

    fn err<T>(&self, span: std::ops::Range<usize>, message: impl Into<String>) -> Result<T, ConfigError> {
        Err(ConfigError {
            line: Some(self.at(span)),
            message: message.into(),
        })
    }
}

fn check_positive_list(
    lines: &Lines,
    v: &Spanned<Vec<f64>>,
    what: &str,
    ok: impl Fn(f64) -> bool,
    bound: &str,
) -> Result<(), ConfigError> {
    if v.get_ref().is_empty() {
        return lines.err(v.span(), format!("{what} must not be empty"));
    }
    if let Some(x) = v.get_ref().iter().find(|&&x| !ok(x)) {
        return lines.err(v.span(), format!("{what} entry {x} violates {bound}"));
    }
    Ok(())
}

fn list_or(v: Option<Spanned<Vec<f64>>>, default: Vec<f64>) -> Vec<f64> {
    v.map(Spanned::into_inner).unwrap_or(default)
}

impl ExperimentConfig {
    /// Configuration for `(N, s, t)` with every other field at its default.
    pub fn with_params(dim: u32, s: f64, t: f64) -> Result<Self, ConfigError> {
        Self::parse(&format!("[params]\nN = {dim}\ns = {s:?}\nt = {t:?}\n"))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let lines = Lines(text);
        let raw: Raw = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| lines.at(s)),
            message: e.message().trim().to_string(),
        })?;

        let experiment = match raw.experiment {
            Some(e) => Some(e.get_ref().parse::<Experiment>().or_else(|m| lines.err(e.span(), m))?),
            None => None,
        };

        let Some(p) = raw.params else {
            return Err(ConfigError {
                line: None,
                message: "missing [params] block with N, s, t".into(),
            });
        };
        let (params_span, p) = (p.span(), p.into_inner());
        if let Err(e) = Params::new(*p.n.get_ref(), *p.s.get_ref(), *p.t.get_ref()) {
            let msg = e.to_string();
            let detail = msg.strip_prefix("invalid argument: ").unwrap_or(&msg);
            let span = if detail.starts_with("t ") {
                p.t.span()
            } else if detail.starts_with("s ") {
                p.s.span()
            } else if detail.starts_with('N') {
                p.n.span()
            } else {
                params_span
            };
            return lines.err(span, detail.to_string());
        }
        let params = ParamsConfig {
            dim: *p.n.get_ref(),
            s: *p.s.get_ref(),
            t: *p.t.get_ref(),
        };
        let derived = params.params();

        let grid = match raw.grid {
            None => GridConfig {
                r_min: DEFAULT_R_MIN,
                r_max: DEFAULT_R_MAX,
                n: DEFAULT_NODES,
            },
            Some(g) => {
                let span = g.span();
                let g = g.into_inner();
                let out = GridConfig {
                    r_min: g.r_min.as_ref().map_or(DEFAULT_R_MIN, |x| *x.get_ref()),
                    r_max: g.r_max.as_ref().map_or(DEFAULT_R_MAX, |x| *x.get_ref()),
                    n: g.n.as_ref().map_or(DEFAULT_NODES, |x| *x.get_ref()),
                };
                if let Err(e) = make_log_grid(out.r_min, out.r_max, out.n) {
                    let at = g
                        .r_min
                        .or(g.r_max)
                        .map(|x| x.span())
                        .or(g.n.map(|x| x.span()))
                        .unwrap_or(span);
                    return lines.err(at, e.to_string());
                }
                out
            }
        };

        let tol = match raw.solver.and_then(|s| s.tol) {
            None => MIN_TOL,
            Some(t) if *t.get_ref() >= MIN_TOL && *t.get_ref() < 1.0 => *t.get_ref(),
            Some(t) => {
                return lines.err(
                    t.span(),
                    format!("tol = {} violates tol ∈ [{MIN_TOL:e}, 1)", t.get_ref()),
                )
            }
        };
        let format = raw.output.and_then(|o| o.format).unwrap_or(Format::Csv);

        let spectrum = {
            let s = raw.spectrum;
            let (k, lambda, gap) = match s {
                Some(s) => (s.k, s.lambda, s.gap_samples),
                None => (None, None, None),
            };
            if let Some(k) = &k {
                if *k.get_ref() < 1 {
                    return lines.err(k.span(), "k must be at least 1");
                }
            }
            if let Some(l) = &lambda {
                if !(*l.get_ref() > 0.0 && l.get_ref().is_finite()) {
                    return lines.err(l.span(), format!("lambda = {} must be positive", l.get_ref()));
                }
            }
            SpectrumConfig {
                k: k.map_or(5, Spanned::into_inner),
                lambda: lambda.map_or(1.0, Spanned::into_inner),
                gap_samples: gap.map_or(100, Spanned::into_inner),
            }
        };

        let interaction = {
            let (pairs, qs) = match raw.interaction {
                Some(i) => (i.pairs, i.qs),
                None => (None, None),
            };
            if let Some(ps) = &pairs {
                if ps.get_ref().is_empty() {
                    return lines.err(ps.span(), "pairs must not be empty");
                }
                if let Some(&(a, b)) = ps.get_ref().iter().find(|&&(a, b)| !(a > 0.0 && b > 0.0)) {
                    return lines.err(ps.span(), format!("exponent pair ({a}, {b}) must be positive"));
                }
            }
            if let Some(q) = &qs {
                check_positive_list(&lines, q, "qs", |x| x > 0.0 && x <= 1.0, "Q ∈ (0, 1]")?;
            }
            let half = derived.crit() / 2.0;
            InteractionConfig {
                pairs: pairs.map_or(vec![(derived.p(), 1.0), (half, half)], Spanned::into_inner),
                qs: list_or(qs, log_space(1e-4, 1e-1, 13)),
            }
        };

        let cutoff = {
            let (inner, ratios) = match raw.cutoff {
                Some(c) => (c.inner, c.ratios),
                None => (None, None),
            };
            if let Some(i) = &inner {
                if !(*i.get_ref() > 0.0 && i.get_ref().is_finite()) {
                    return lines.err(i.span(), format!("inner = {} must be positive", i.get_ref()));
                }
            }
            if let Some(r) = &ratios {
                check_positive_list(&lines, r, "ratios", |x| x > 1.0 && x.is_finite(), "R/r > 1")?;
            }
            CutoffConfig {
                inner: inner.map_or(1.0, Spanned::into_inner),
                ratios: list_or(ratios, log_space(1e2, 1e5, 7)),
            }
        };

        let kpv = {
            let (pairs, lambdas) = match raw.kpv {
                Some(k) => (k.pairs, k.lambdas),
                None => (None, None),
            };
            if let Some(p) = &pairs {
                if *p.get_ref() < 1 {
                    return lines.err(p.span(), "pairs must be at least 1");
                }
            }
            if let Some(l) = &lambdas {
                check_positive_list(&lines, l, "lambdas", |x| x > 0.0 && x.is_finite(), "lambda > 0")?;
            }
            KpvConfig {
                pairs: pairs.map_or(20, Spanned::into_inner),
                lambdas: list_or(lambdas, log_space(1e-1, 1e2, 4)),
            }
        };

        let stability = {
            let (nu, kappas) = match raw.stability {
                Some(s) => (s.nu, s.kappas),
                None => (None, None),
            };
            if let Some(n) = &nu {
                if *n.get_ref() < 1 {
                    return lines.err(n.span(), "nu must be at least 1");
                }
            }
            if let Some(k) = &kappas {
                check_positive_list(&lines, k, "kappas", |x| x > 0.0 && x < 1.0, "κ ∈ (0, 1)")?;
                if k.get_ref().len() < 2 {
                    return lines.err(k.span(), "kappas needs at least two points for the slopes");
                }
            }
            StabilityConfig {
                nu: nu.map_or(2, Spanned::into_inner),
                kappas: list_or(kappas, log_space(1e-4, 1e-2, 5)),
            }
        };

        let project = match raw.project {
            None => ProjectConfig {
                scales: vec![1e-3, 1e3],
                coeffs: vec![1.0, 1.0],
                perturbation: 0.0,
            },
            Some(pr) => {
                let span = pr.span();
                let pr = pr.into_inner();
                if let Some(s) = &pr.scales {
                    check_positive_list(&lines, s, "scales", |x| x > 0.0 && x.is_finite(), "λ > 0")?;
                }
                if let Some(c) = &pr.coeffs {
                    if let Some(x) = c.get_ref().iter().find(|x| !x.is_finite() || **x == 0.0) {
                        return lines.err(c.span(), format!("coefficient {x} must be finite and nonzero"));
                    }
                }
                if let Some(e) = &pr.perturbation {
                    if !e.get_ref().is_finite() {
                        return lines.err(e.span(), "perturbation must be finite");
                    }
                }
                let scales = list_or(pr.scales, vec![1e-3, 1e3]);
                let coeffs = list_or(pr.coeffs, vec![1.0; scales.len()]);
                if coeffs.len() != scales.len() {
                    return lines.err(span, format!("{} coeffs for {} scales", coeffs.len(), scales.len()));
                }
                ProjectConfig {
                    scales,
                    coeffs,
                    perturbation: pr.perturbation.map_or(0.0, Spanned::into_inner),
                }
            }
        };

        Ok(Self {
            experiment,
            seed: raw.seed.map_or(0, Spanned::into_inner),
            params,
            grid,
            tol,
            format,
            spectrum,
            interaction,
            cutoff,
            kpv,
            stability,
            project,
        })
    }

    pub fn params(&self) -> Params {
        self.params.params()
    }

    pub fn grid(&self) -> RadialGrid {
        make_log_grid(self.grid.r_min, self.grid.r_max, self.grid.n).expect("grid validated on load")
    }
}

impl ParamsConfig {
    pub fn params(&self) -> Params {
        Params::new(self.dim, self.s, self.t).expect("params validated on load")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANAR: &str = "[params]\nN = 2\ns = 0.75\nt = 0.5\n";

    #[test]
    fn defaults_fill_absent_blocks() {
        let c = ExperimentConfig::parse(PLANAR).unwrap();
        assert_eq!(c.grid.n, DEFAULT_NODES);
        assert_eq!(c.tol, MIN_TOL);
        assert_eq!(c.spectrum.k, 5);
        assert_eq!(c.interaction.pairs[0], (5.0, 1.0));
        assert_eq!(c.interaction.qs.len(), 13);
        assert!((c.interaction.qs[0] - 1e-4).abs() < 1e-18 && (c.interaction.qs[12] - 1e-1).abs() < 1e-15);
        assert_eq!(c.stability.nu, 2);
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c, ExperimentConfig::with_params(2, 0.75, 0.5).unwrap());
    }

    #[test]
    fn bad_t_cites_bound_and_line() {
        let e = ExperimentConfig::parse("seed = 1\n[params]\nN = 2\ns = 0.75\nt = 1.5\n").unwrap_err();
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("t ∈ (0, 2s)"), "{e}");
        assert!(e.to_string().starts_with("config line 5:"));
    }

    #[test]
    fn other_fields_are_line_referenced() {
        let cases = [
            ("[params]\nN = 2\ns = 1.5\nt = 0.5\n", 3),
            ("[params]\nN = 1\ns = 0.75\nt = 0.5\n", 2),
            (&format!("{PLANAR}[solver]\ntol = 0.0\n"), 6),
            (&format!("{PLANAR}[stability]\nnu = 2\nkappas = [0.5, 2.0]\n"), 7),
            (&format!("{PLANAR}[grid]\nr_min = 10.0\nr_max = 1.0\n"), 6),
            (&format!("{PLANAR}[project]\nscales = [1.0, 2.0]\ncoeffs = [1.0]\n"), 5),
            (&format!("{PLANAR}[spectrum]\nbogus = 1\n"), 6),
            (&format!("experiment = \"nope\"\n{PLANAR}"), 1),
        ];
        for (text, line) in cases {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(e.line, Some(line), "{text}: {e}");
        }
        assert_eq!(ExperimentConfig::parse("").unwrap_err().line, None);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        let c = ExperimentConfig::parse(&format!("experiment = \"kpv-sweep\"\n{PLANAR}")).unwrap();
        assert_eq!(c.experiment, Some(Experiment::KpvSweep));
    }
}
