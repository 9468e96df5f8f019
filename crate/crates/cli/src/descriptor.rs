//! Shell grammar for sets, drums, closed forms and spectral models.
//!
//! ```text
//! cantor:m,a            generalized Cantor set, a rational (p/q or decimal)
//! string:geometric,r    endpoints of l_j = r^j
//! string:cantor         endpoints of the Cantor string
//! sphere:N,R            sphere of radius R in R^N
//! carpet[:level]        Sierpinski carpet
//! cusp:alpha | cusp:exp cusp drum at the origin
//! qp:D;m1,m2,...        quasiperiodic assembly of common dimension D
//! interval:l, rectangle:a,b, spray:gamma,b,<base>   spectral models
//! ```

use fzeta::model::{ExactReal, FractalString, GeneralizedCantorParams, RelativeFractalDrum, SetDescriptor};
use fzeta::quasiperiodic::{build_assembly, QuasiperiodicAssembly};
use fzeta::spectral::EigenvalueModel;
use fzeta::{Error, Result, C64};

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn split_kind(text: &str) -> (&str, &str) {
    match text.split_once(':') {
        Some((k, rest)) => (k.trim(), rest.trim()),
        None => (text.trim(), ""),
    }
}

pub fn decimal(text: &str) -> Result<f64> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        return Ok(decimal(p)? / decimal(q)?);
    }
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| parse_err(format!("not a decimal number: {text:?}")))
}

fn exact(text: &str) -> Result<ExactReal> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(format!("not an exact rational: {text:?}")))
}

fn integer<T: std::str::FromStr>(text: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(format!("not a natural number: {text:?}")))
}

fn args(rest: &str, n: usize, usage: &str) -> Result<Vec<String>> {
    let parts: Vec<String> = rest.split(',').map(|p| p.trim().to_string()).collect();
    if parts.len() != n || parts.iter().any(String::is_empty) {
        return Err(parse_err(format!("expected {usage}")));
    }
    Ok(parts)
}

pub fn cantor_params(rest: &str) -> Result<GeneralizedCantorParams> {
    let p = args(rest, 2, "cantor:m,a")?;
    GeneralizedCantorParams::new(integer(&p[0])?, exact(&p[1])?)
}

pub fn string(rest: &str) -> Result<FractalString> {
    match split_kind(&rest.replacen(',', ":", 1)) {
        ("geometric", r) => Ok(FractalString::geometric(decimal(r)?)),
        ("cantor", "") => Ok(FractalString::cantor()),
        _ => Err(parse_err(format!("expected string:geometric,r or string:cantor, got string:{rest}"))),
    }
}

fn sphere(rest: &str) -> Result<(u32, ExactReal)> {
    let p = args(rest, 2, "sphere:N,R")?;
    Ok((integer(&p[0])?, exact(&p[1])?))
}

pub fn assembly(rest: &str) -> Result<QuasiperiodicAssembly> {
    let (d, ms) = rest
        .split_once(';')
        .ok_or_else(|| parse_err("expected qp:D;m1,m2,..."))?;
    let ms = ms.split(',').map(integer::<u64>).collect::<Result<Vec<_>>>()?;
    build_assembly(exact(d)?, &ms)
}

/// An absolute set.
pub fn set(text: &str) -> Result<SetDescriptor> {
    let (kind, rest) = split_kind(text);
    match kind {
        "cantor" => Ok(SetDescriptor::cantor(cantor_params(rest)?)),
        "string" => Ok(SetDescriptor::StringEndpoints { string: string(rest)? }),
        "sphere" => {
            let (dim, radius) = sphere(rest)?;
            Ok(SetDescriptor::Sphere {
                dim,
                radius,
                center: vec![ExactReal::integer(0); dim as usize],
            })
        }
        "carpet" => Ok(SetDescriptor::SierpinskiCarpet {
            level: if rest.is_empty() { 7 } else { integer(rest)? },
        }),
        "qp" => Ok(assembly(rest)?.descriptor()),
        "cusp" => Err(Error::Unsupported("cusps are drums; pass them with --drum".into())),
        _ => Err(parse_err(format!("unknown set kind {kind:?}"))),
    }
}

/// A relative fractal drum.
pub fn drum(text: &str) -> Result<RelativeFractalDrum> {
    let (kind, rest) = split_kind(text);
    match kind {
        "cusp" if rest == "exp" => Ok(RelativeFractalDrum::exp_cusp()),
        "cusp" => Ok(RelativeFractalDrum::cusp(exact(rest)?)),
        "string" => Ok(RelativeFractalDrum::string_drum(string(rest)?)),
        "carpet" => Ok(RelativeFractalDrum::carpet(if rest.is_empty() { 7 } else { integer(rest)? })),
        _ => Err(parse_err(format!("unknown drum kind {kind:?}"))),
    }
}

/// A spectral model.
pub fn spectral_model(text: &str) -> Result<EigenvalueModel> {
    let (kind, rest) = split_kind(text);
    match kind {
        "interval" => Ok(EigenvalueModel::Interval { length: decimal(rest)? }),
        "rectangle" => {
            let p = args(rest, 2, "rectangle:a,b")?;
            Ok(EigenvalueModel::Rectangle {
                a: decimal(&p[0])?,
                b: decimal(&p[1])?,
            })
        }
        "string" => Ok(EigenvalueModel::FractalStringDrum { string: string(rest)? }),
        "spray" => {
            let mut it = rest.splitn(3, ',');
            let (Some(g), Some(b), Some(base)) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err("expected spray:gamma,b,<base model>"));
            };
            let model = EigenvalueModel::Spray {
                base: Box::new(spectral_model(base)?),
                gamma: decimal(g)?,
                b: integer(b)?,
            };
            model.validate()?;
            Ok(model)
        }
        _ => Err(parse_err(format!("unknown spectral model {kind:?}"))),
    }
}

/// `a`, `a+bi`, `a-bi`, `bi`.
pub fn complex(text: &str) -> Result<C64> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || parse_err(format!("not a complex number: {text:?}"));
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(decimal(&t)?, 0.0));
    };
    // split at the last sign that is not an exponent sign or the leading one
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (decimal(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(C64::new(re, im))
}

/// Comma-separated list of complex numbers.
pub fn complex_list(text: &str) -> Result<Vec<C64>> {
    text.split(',').map(complex).collect()
}

/// Exactly `n` comma-separated decimals.
pub fn decimals(text: &str, n: usize, usage: &str) -> Result<Vec<f64>> {
    args(text, n, usage)?.iter().map(|p| decimal(p)).collect()
}
