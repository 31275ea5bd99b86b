//! Parsing of the textual flag values.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use tq_geometry::model::{CaseClass, InitialCoefficients};
use tq_geometry::{Error, Result};

/// Off-norm η beyond this is normalized with a warning.
pub const ETA_NORM_WARN: f64 = 1e-9;

pub fn parse_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let t = p.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("{what}: `{t}` is not a finite number")))
        })
        .collect()
}

pub fn parse_couplings(s: &str) -> Result<[f64; 3]> {
    let v = parse_list(s, "--c")?;
    <[f64; 3]>::try_from(v.as_slice())
        .map_err(|_| Error::InvalidArgument(format!("--c expects c1,c2,c3, got {} values", v.len())))
}

/// One complex number: `re`, `imj`, `re+imj`, `re-imj` or `mag@phase`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("`{s}` is not a complex number (re+imj or mag@phase)"));
    let num = |x: &str| x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    if let Some((m, p)) = t.split_once('@') {
        let (m, p) = (num(m)?, num(p)?);
        if m < 0.0 {
            return Err(bad());
        }
        return Ok(Complex64::from_polar(m, p));
    }
    let Some(body) = t.strip_suffix(['j', 'i']) else {
        return Ok(Complex64::new(num(&t)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |x: &str| match x {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => num(other),
    };
    match split {
        Some(k) => Ok(Complex64::new(num(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// Parsed η together with the norm it had on input.
#[derive(Debug, Clone, Copy)]
pub struct ParsedEta {
    pub eta: InitialCoefficients,
    pub input_norm: f64,
    pub renormalized: bool,
}

pub fn parse_eta(s: &str) -> Result<ParsedEta> {
    let parts: Vec<Complex64> = s.split(',').map(parse_complex).collect::<Result<_>>()?;
    let raw = <[Complex64; 4]>::try_from(parts.as_slice())
        .map_err(|_| Error::InvalidArgument(format!("--eta expects four coefficients, got {}", parts.len())))?;
    let (eta, norm) = InitialCoefficients::normalized(raw)?;
    Ok(ParsedEta { eta, input_norm: norm, renormalized: (norm - 1.0).abs() > ETA_NORM_WARN })
}

/// Accepts `C1`…`C7`, optionally followed by `(l=…,j=…)`; indices default to l = 1, j = 4.
pub fn parse_case(s: &str) -> Result<CaseClass> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_uppercase();
    let bad = || Error::InvalidArgument(format!("unknown case `{s}`"));
    let (head, rest) = match t.find('(') {
        Some(k) => (&t[..k], t[k..].trim_start_matches('(').trim_end_matches(')')),
        None => (t.as_str(), ""),
    };
    let (mut l, mut j) = (1u8, 4u8);
    for kv in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(bad)?;
        let v: u8 = v.parse().map_err(|_| bad())?;
        match k {
            "L" if (1..=2).contains(&v) => l = v,
            "J" if (3..=4).contains(&v) => j = v,
            _ => return Err(bad()),
        }
    }
    Ok(match head {
        "C1" => CaseClass::C1,
        "C2" => CaseClass::C2 { l },
        "C3" => CaseClass::C3,
        "C4" => CaseClass::C4 { l, j },
        "C5" => CaseClass::C5 { j },
        "C6" => CaseClass::C6 { l },
        "C7" => CaseClass::C7,
        _ => return Err(bad()),
    })
}

/// A representative η for a case, used when only `--case` is given.
pub fn default_eta(case: CaseClass) -> InitialCoefficients {
    let r = FRAC_1_SQRT_2;
    let mut m = [0.0; 4];
    match case {
        CaseClass::C1 => m = [0.0, 0.0, r, r],
        CaseClass::C2 { l } => m[l as usize - 1] = 1.0,
        CaseClass::C3 => m = [r, r, 0.0, 0.0],
        CaseClass::C4 { l, j } => {
            m[l as usize - 1] = r;
            m[j as usize - 1] = r;
        }
        CaseClass::C5 { j } => {
            m = [0.5, 0.5, 0.0, 0.0];
            m[j as usize - 1] = r;
        }
        CaseClass::C6 { l } => {
            m = [0.0, 0.0, 0.5, 0.5];
            m[l as usize - 1] = r;
        }
        CaseClass::C7 => m = [0.5; 4],
    }
    InitialCoefficients::from_real(m).expect("unit vector")
}
