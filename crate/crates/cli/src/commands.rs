use std::fmt::Write as _;

use clap::{Args, ValueEnum};
use fzeta::analysis::{classify, estimate_dimensions, fit_log_periodic, pole_scan_form};
use fzeta::forms::{
    cantor_distance_zeta_form, cantor_tube_zeta_form, geometric_zeta_form, local_ball_tube_zeta_form,
    sierpinski_relative_zeta_form, sphere_distance_zeta_form, sphere_tube_zeta_form, string_relative_zeta_form,
    MeromorphicForm, Window,
};
use fzeta::model::{Classification, ContentValue, DimValue, RelativeFractalDrum, SetDescriptor, TubeSamples};
use fzeta::numeric::{distance_zeta, relative_distance_zeta, ZetaEvaluation};
use fzeta::quasiperiodic::assembly_zeta_form;
use fzeta::spectral::{self, EigenvalueModel};
use fzeta::tube::{geometric_grid, sample_tube, TubeTarget};
use fzeta::{verify, Error, Result, C64};

use crate::descriptor::{self as grammar, complex_list, decimal, decimals};

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct Options {
    /// Absolute set, e.g. `cantor:2,1/3` or `sphere:3,1`.
    #[arg(long)]
    pub set: Option<String>,
    /// Relative fractal drum, e.g. `cusp:2` or `string:geometric,0.5`.
    #[arg(long)]
    pub drum: Option<String>,
    /// Closed form, e.g. `cantor:2,1/3` or `sierpinski`.
    #[arg(long)]
    pub form: Option<String>,
    /// Spectral model, e.g. `rectangle:1,2` or `spray:1/3,2,interval:1`.
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated complex points, e.g. `0.8+0i,1.2-3i`.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Pole scan: cells per side. Tube commands: `t_max,ratio,count`. Weyl: `mu_lo,mu_hi,count`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Fail when an estimated error exceeds this.
    #[arg(long)]
    pub tol: Option<String>,
    /// Number of eigenvalues or series terms.
    #[arg(long)]
    pub count: Option<String>,
    /// Fourier harmonics in an oscillation fit.
    #[arg(long)]
    pub harmonics: Option<String>,
    /// Known dimension: fixes `D` in oscillation fits, or the expected Weyl remainder exponent.
    #[arg(long)]
    pub dim: Option<String>,
    /// Reproduction suite name.
    #[arg(long)]
    pub suite: Option<String>,
    /// Run a single criterion of the suite.
    #[arg(long)]
    pub criterion: Option<String>,
    #[arg(skip)]
    pub set_json: Option<SetDescriptor>,
    #[arg(skip)]
    pub drum_json: Option<RelativeFractalDrum>,
    #[arg(skip)]
    pub model_json: Option<EigenvalueModel>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpectralAction {
    Eigen,
    Zeta,
    Weyl,
    Residue,
}

/// Output text and whether the run counts as a success.
pub struct Output {
    pub text: String,
    pub ok: bool,
}

impl Output {
    fn csv(text: String) -> Self {
        Output { text, ok: true }
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Parse(format!("missing --{flag}")))
}

fn natural(text: &str, what: &str) -> Result<usize> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what} must be a natural number, got {text:?}")))
}

impl Options {
    fn delta(&self) -> Result<Option<f64>> {
        self.delta.as_deref().map(decimal).transpose()
    }

    fn tol(&self) -> Result<Option<f64>> {
        self.tol.as_deref().map(decimal).transpose()
    }

    fn points(&self) -> Result<Vec<C64>> {
        complex_list(need(&self.s, "s")?)
    }

    fn count(&self, default: usize) -> Result<usize> {
        self.count.as_deref().map_or(Ok(default), |c| natural(c, "--count"))
    }

    fn set(&self) -> Result<Option<SetDescriptor>> {
        match (&self.set_json, &self.set) {
            (Some(s), _) => Ok(Some(s.clone())),
            (None, Some(text)) => grammar::set(text).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn drum(&self) -> Result<Option<RelativeFractalDrum>> {
        match (&self.drum_json, &self.drum) {
            (Some(d), _) => Ok(Some(d.clone())),
            (None, Some(text)) => grammar::drum(text).map(Some),
            (None, None) => Ok(None),
        }
    }

    fn model(&self) -> Result<EigenvalueModel> {
        match (&self.model_json, &self.model) {
            (Some(m), _) => {
                m.validate()?;
                Ok(m.clone())
            }
            (None, Some(text)) => grammar::spectral_model(text),
            (None, None) => Err(Error::Parse("missing --model".into())),
        }
    }

    fn target(&self) -> Result<Target> {
        match (self.set()?, self.drum()?) {
            (Some(s), None) => Ok(Target::Set(s)),
            (None, Some(d)) => Ok(Target::Drum(d)),
            (Some(_), Some(_)) => Err(Error::Parse("pass either --set or --drum, not both".into())),
            (None, None) => Err(Error::Parse("missing --set or --drum".into())),
        }
    }

    fn tube_grid(&self) -> Result<Vec<f64>> {
        let (t_max, ratio, count) = match &self.grid {
            Some(g) => {
                let v = decimals(g, 3, "--grid t_max,ratio,count")?;
                (v[0], v[1], v[2])
            }
            None => (0.1, 0.99, 1200.0),
        };
        if !(t_max > 0.0 && ratio > 0.0 && ratio < 1.0 && count >= 2.0 && count.fract() == 0.0) {
            return Err(Error::Parameter("--grid needs t_max > 0, 0 < ratio < 1 and an integer count >= 2".into()));
        }
        Ok(geometric_grid(t_max, ratio, count as usize))
    }
}

enum Target {
    Set(SetDescriptor),
    Drum(RelativeFractalDrum),
}

impl Target {
    fn tube(&self) -> TubeTarget<'_> {
        match self {
            Target::Set(s) => TubeTarget::Set(s),
            Target::Drum(d) => TubeTarget::Drum(d),
        }
    }

    fn samples(&self, opts: &Options) -> Result<TubeSamples> {
        sample_tube(self.tube(), &opts.tube_grid()?)
    }
}

/// Default `delta` for an absolute set: half the radius for spheres, `1/2` otherwise.
fn default_delta(set: &SetDescriptor) -> f64 {
    match set {
        SetDescriptor::Sphere { radius, .. } => 0.5 * radius.to_f64(),
        _ => 0.5,
    }
}

fn check_tol(eval: &ZetaEvaluation, tol: Option<f64>) -> Result<()> {
    match tol {
        Some(tol) if eval.est_error > tol => Err(Error::TooCoarse {
            est_error: eval.est_error,
            tol,
        }),
        _ => Ok(()),
    }
}

pub fn zeta(opts: &Options) -> Result<Output> {
    let target = opts.target()?;
    let tol = opts.tol()?;
    let mut rows = Vec::new();
    for s in opts.points()? {
        let eval = match &target {
            Target::Set(set) => distance_zeta(set, opts.delta()?.unwrap_or_else(|| default_delta(set)), s)?,
            Target::Drum(drum) => relative_distance_zeta(drum, opts.delta()?, s)?,
        };
        check_tol(&eval, tol)?;
        rows.push(vec![
            num(s.re),
            num(s.im),
            num(eval.value.re),
            num(eval.value.im),
            num(eval.est_error),
            eval.method.as_str().to_string(),
        ]);
    }
    Ok(Output::csv(csv("s_re,s_im,value_re,value_im,est_error,method", rows)))
}

pub fn tube(opts: &Options) -> Result<Output> {
    let samples = opts.target()?.samples(opts)?;
    let rows = samples
        .samples
        .iter()
        .map(|p| vec![num(p.t), num(p.volume), p.exact.to_string(), num(p.error_bound)]);
    Ok(Output::csv(csv("t,volume,exact,error_bound", rows)))
}

fn dim_text(d: DimValue) -> String {
    num(d.value())
}

fn content_text(c: ContentValue) -> String {
    match c {
        ContentValue::Finite(x) => num(x),
        ContentValue::Zero => "0".into(),
        ContentValue::Infinite => "inf".into(),
    }
}

fn class_text(c: &Classification) -> String {
    match c {
        Classification::Degenerate => "degenerate".into(),
        Classification::Measurable => "measurable".into(),
        Classification::Periodic { period, .. } => format!("periodic({})", num(*period)),
        Classification::Nonperiodic { .. } => "nonperiodic".into(),
    }
}

/// The caller's `--dim` when given, else the estimate.
fn fit_dim(opts: &Options, estimate: f64) -> Result<f64> {
    Ok(opts.dim.as_deref().map(decimal).transpose()?.unwrap_or(estimate))
}

fn harmonics(opts: &Options) -> Result<u32> {
    Ok(opts.harmonics.as_deref().map_or(Ok(3), |h| natural(h, "--harmonics"))? as u32)
}

pub fn dim(opts: &Options) -> Result<Output> {
    let samples = opts.target()?.samples(opts)?;
    let report = estimate_dimensions(&samples)?;
    let class = match fit_log_periodic(&samples, fit_dim(opts, report.dim)?, harmonics(opts)?) {
        Ok(fit) => class_text(&classify(&report, &fit)),
        Err(_) => report
            .classification
            .as_ref()
            .map_or_else(|| "unknown".into(), class_text),
    };
    let row = vec![
        dim_text(report.lower_dim),
        dim_text(report.upper_dim),
        num(report.dim),
        content_text(report.lower_content),
        content_text(report.upper_content),
        class,
    ];
    Ok(Output::csv(csv(
        "lower_dim,upper_dim,dim,lower_content,upper_content,classification",
        [row],
    )))
}

pub fn fit(opts: &Options) -> Result<Output> {
    let samples = opts.target()?.samples(opts)?;
    let report = estimate_dimensions(&samples)?;
    let fit = fit_log_periodic(&samples, fit_dim(opts, report.dim)?, harmonics(opts)?)?;
    let period = fit.period.map_or_else(|| "".into(), num);
    let rows = fit.fourier.iter().map(|(k, c)| {
        vec![
            num(fit.dim),
            period.clone(),
            num(fit.fit_residual),
            k.to_string(),
            num(c.re),
            num(c.im),
        ]
    });
    Ok(Output::csv(csv("dim,period,fit_residual,k,coef_re,coef_im", rows)))
}

/// Closed forms by name.
///
/// ```text
/// cantor:m,a  cantor-tube:m,a  sphere:N,R  sphere-distance:N,R  ball:N,r
/// sierpinski  string:<string>  lengths:<string>  qp:D;m1,m2,...
/// ```
fn closed_form(text: &str, delta: Option<f64>) -> Result<MeromorphicForm> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    let pair = |usage: &str| -> Result<(u32, f64)> {
        let (n, r) = rest.split_once(',').ok_or_else(|| Error::Parse(format!("expected {usage}")))?;
        Ok((natural(n, "N")? as u32, decimal(r)?))
    };
    match kind.trim() {
        "cantor" => cantor_distance_zeta_form(&grammar::cantor_params(rest)?, delta.unwrap_or(0.5)),
        "cantor-tube" => cantor_tube_zeta_form(&grammar::cantor_params(rest)?, delta.unwrap_or(0.5)),
        "sphere" => {
            let (n, r) = pair("sphere:N,R")?;
            sphere_tube_zeta_form(n, r, delta.unwrap_or(0.5 * r))
        }
        "sphere-distance" => {
            let (n, r) = pair("sphere-distance:N,R")?;
            sphere_distance_zeta_form(n, r, delta.unwrap_or(0.5 * r))
        }
        "ball" => {
            let (n, r) = pair("ball:N,r")?;
            local_ball_tube_zeta_form(n, r, delta.unwrap_or(0.5 * r))
        }
        "sierpinski" | "carpet" => Ok(sierpinski_relative_zeta_form()),
        "string" => string_relative_zeta_form(&grammar::string(rest)?),
        "lengths" => geometric_zeta_form(&grammar::string(rest)?),
        "qp" => assembly_zeta_form(&grammar::assembly(rest)?, delta.unwrap_or(0.5)),
        other => Err(Error::Parse(format!("unknown closed form {other:?}"))),
    }
}

pub fn form(opts: &Options) -> Result<Output> {
    let f = closed_form(need(&opts.form, "form")?, opts.delta()?)?;
    let rows = opts
        .points()?
        .into_iter()
        .map(|s| {
            let v = f.eval(s);
            vec![num(s.re), num(s.im), num(v.re), num(v.im)]
        })
        .collect::<Vec<_>>();
    Ok(Output::csv(csv("s_re,s_im,value_re,value_im", rows)))
}

pub fn poles(opts: &Options) -> Result<Output> {
    let f = closed_form(need(&opts.form, "form")?, opts.delta()?)?;
    let w = decimals(need(&opts.window, "window")?, 4, "--window re_min,re_max,im_min,im_max")?;
    let window = Window::new([w[0], w[1]], [w[2], w[3]])?;
    let grid = opts.grid.as_deref().map_or(Ok(4), |g| natural(g, "--grid"))?;
    let found = pole_scan_form(&f, &window, grid)?;
    let rows = found.iter().map(|p| {
        let (are, aim) = p.analytic_residue.map_or((String::new(), String::new()), |a| (num(a.re), num(a.im)));
        vec![
            num(p.location.re),
            num(p.location.im),
            p.multiplicity.to_string(),
            num(p.numeric_residue.re),
            num(p.numeric_residue.im),
            are,
            aim,
            num(p.residue_discrepancy),
        ]
    });
    Ok(Output::csv(csv(
        "re,im,multiplicity,numeric_residue_re,numeric_residue_im,analytic_residue_re,analytic_residue_im,discrepancy",
        rows,
    )))
}

pub fn qp(opts: &Options) -> Result<Output> {
    let text = need(&opts.set, "set")?;
    let rest = text
        .strip_prefix("qp:")
        .ok_or_else(|| Error::Parse("qp expects --set qp:D;m1,m2,...".into()))?;
    let assembly = grammar::assembly(rest)?;
    if opts.s.is_none() {
        let rows = assembly.components.iter().zip(&assembly.lattice_spacings).enumerate().map(|(i, (c, w))| {
            vec![i.to_string(), c.m.to_string(), num(c.params.a()), num(c.period), num(*w)]
        });
        return Ok(Output::csv(csv("component,m,a,period,lattice_spacing", rows)));
    }
    let delta = opts.delta()?.unwrap_or(0.5);
    let form = assembly_zeta_form(&assembly, delta)?;
    let set = assembly.descriptor();
    let tol = opts.tol()?;
    let mut rows = Vec::new();
    for s in opts.points()? {
        let f = form.eval(s);
        let n = distance_zeta(&set, delta, s)?;
        check_tol(&n, tol)?;
        rows.push(vec![
            num(s.re),
            num(s.im),
            num(f.re),
            num(f.im),
            num(n.value.re),
            num(n.value.im),
            num(n.est_error),
        ]);
    }
    Ok(Output::csv(csv(
        "s_re,s_im,form_re,form_im,numeric_re,numeric_im,est_error",
        rows,
    )))
}

pub fn spectral(action: SpectralAction, opts: &Options) -> Result<Output> {
    let model = opts.model()?;
    match action {
        SpectralAction::Eigen => {
            let ev = model.first_eigenvalues(opts.count(20)?)?;
            let rows = ev.iter().enumerate().map(|(i, mu)| vec![(i + 1).to_string(), num(*mu)]);
            Ok(Output::csv(csv("index,mu", rows)))
        }
        SpectralAction::Zeta => {
            let k = opts.count(100_000)?;
            let tol = opts.tol()?;
            let mut rows = Vec::new();
            for s in opts.points()? {
                let eval = spectral::spectral_zeta(&model, s, k)?;
                check_tol(&eval, tol)?;
                rows.push(vec![
                    num(s.re),
                    num(s.im),
                    num(eval.value.re),
                    num(eval.value.im),
                    num(eval.est_error),
                    eval.method.as_str().to_string(),
                ]);
            }
            Ok(Output::csv(csv("s_re,s_im,value_re,value_im,est_error,method", rows)))
        }
        SpectralAction::Weyl => {
            let g = match &opts.grid {
                Some(g) => decimals(g, 3, "--grid mu_lo,mu_hi,count")?,
                None => vec![10.0, 1e5, 40.0],
            };
            if !(g[0] > 0.0 && g[1] > g[0] && g[2] >= 2.0 && g[2].fract() == 0.0) {
                return Err(Error::Parameter("--grid needs 0 < mu_lo < mu_hi and an integer count >= 2".into()));
            }
            let d = opts.dim.as_deref().map(decimal).transpose()?;
            let report = spectral::weyl_check(&model, &spectral::log_grid(g[0], g[1], g[2] as usize), d)?;
            let opt = |x: Option<f64>| x.map_or_else(String::new, num);
            let rows = report.points.iter().map(|(mu, n, r)| {
                vec![
                    num(*mu),
                    n.to_string(),
                    num(*r),
                    num(report.sup_abs_remainder),
                    opt(report.exponent_mu),
                    opt(report.exponent_frequency),
                    opt(report.expected_mu),
                ]
            });
            Ok(Output::csv(csv(
                "mu,count,remainder,sup_abs_remainder,exponent_mu,exponent_frequency,expected_mu",
                rows,
            )))
        }
        SpectralAction::Residue => {
            let r = spectral::spectral_residue_check(&model, opts.count(200_000)?)?;
            let row = vec![
                num(r.estimate),
                num(r.expected),
                num(r.relative_error),
                num(r.extrapolation_residual),
                r.slow_convergence.to_string(),
            ];
            Ok(Output::csv(csv(
                "estimate,expected,relative_error,extrapolation_residual,slow_convergence",
                [row],
            )))
        }
    }
}

pub fn run_verify(opts: &Options) -> Result<Output> {
    let suite = opts.suite.as_deref().unwrap_or("paper");
    if suite != "paper" {
        return Err(Error::Parse(format!("unknown suite {suite:?}; the only suite is \"paper\"")));
    }
    let results = match &opts.criterion {
        Some(id) => vec![verify::run_criterion(natural(id, "--criterion")? as u32)?],
        None => verify::run_suite(),
    };
    let mut text = String::new();
    for r in &results {
        let _ = writeln!(text, "{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(text, "{passed}/{} criteria passed", results.len());
    Ok(Output {
        text,
        ok: passed == results.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn closed_form_names() {
        for name in ["cantor:2,1/3", "cantor-tube:3,1/5", "sphere:3,1", "sierpinski", "lengths:geometric,0.5", "qp:1/2;2,3"] {
            closed_form(name, None).unwrap();
        }
        assert!(matches!(closed_form("nope", None), Err(Error::Parse(_))));
    }
}
