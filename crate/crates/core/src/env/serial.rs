//! Environment serialization: a plain-text columnar format (site, omega) and
//! a compact binary format. Both round-trip exactly: text uses Rust's
//! shortest-exact float formatting, binary stores raw f64 bits.

use std::io::{BufRead, Read, Write};

use crate::env::{Environment, EnvironmentLaw, LawKind};
use crate::error::{Error, Result};

const BINARY_VERSION: u8 = 1;

fn law_tag(kind: LawKind) -> (u8, Vec<f64>) {
    match kind {
        LawKind::TwoPoint { omega_a, omega_b, q } => (1, vec![omega_a, omega_b, q]),
        LawKind::Beta { a, b } => (2, vec![a, b]),
        LawKind::Uniform { lo, hi } => (3, vec![lo, hi]),
    }
}

fn law_from_tag(tag: u8, params: &[f64]) -> Result<EnvironmentLaw> {
    let kind = match (tag, params) {
        (1, [omega_a, omega_b, q]) => LawKind::TwoPoint {
            omega_a: *omega_a,
            omega_b: *omega_b,
            q: *q,
        },
        (2, [a, b]) => LawKind::Beta { a: *a, b: *b },
        (3, [lo, hi]) => LawKind::Uniform { lo: *lo, hi: *hi },
        _ => return Err(Error::Parse(format!("unknown law tag {tag}"))),
    };
    EnvironmentLaw::new(kind)
}

/// Write the columnar text form: '#'-prefixed header lines, then one
/// "site omega" pair per line.
pub fn write_text<W: Write>(env: &Environment, mut out: W) -> Result<()> {
    writeln!(out, "# rwre environment v1")?;
    let (tag, params) = law_tag(env.law().kind());
    let params_str = params
        .iter()
        .map(|p| format!("{p}"))
        .collect::<Vec<_>>()
        .join(" ");
    writeln!(
        out,
        "# left {} right {} seed {} law {} {}",
        env.left(),
        env.right(),
        env.seed(),
        tag,
        params_str
    )?;
    for (i, w) in env.omegas().iter().enumerate() {
        writeln!(out, "{} {}", env.left() + i as i64, w)?;
    }
    Ok(())
}

/// Read the columnar text form back.
pub fn read_text<R: BufRead>(input: R) -> Result<Environment> {
    let mut left: Option<i64> = None;
    let mut seed = 0u64;
    let mut law: Option<EnvironmentLaw> = None;
    let mut omegas = Vec::new();
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.first() == Some(&"left") {
                let geti = |i: usize| -> Result<&str> {
                    toks.get(i)
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("short header: {line}")))
                };
                left = Some(
                    geti(1)?
                        .parse()
                        .map_err(|e| Error::Parse(format!("left: {e}")))?,
                );
                seed = geti(5)?
                    .parse()
                    .map_err(|e| Error::Parse(format!("seed: {e}")))?;
                let tag: u8 = geti(7)?
                    .parse()
                    .map_err(|e| Error::Parse(format!("law tag: {e}")))?;
                let params: Vec<f64> = toks[8..]
                    .iter()
                    .map(|t| t.parse().map_err(|e| Error::Parse(format!("law param: {e}"))))
                    .collect::<Result<_>>()?;
                law = Some(law_from_tag(tag, &params)?);
            }
            continue;
        }
        let mut it = line.split_whitespace();
        let _site: i64 = it
            .next()
            .ok_or_else(|| Error::Parse("missing site".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("site: {e}")))?;
        let w: f64 = it
            .next()
            .ok_or_else(|| Error::Parse("missing omega".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("omega: {e}")))?;
        omegas.push(w);
    }
    let left = left.ok_or_else(|| Error::Parse("missing header line".into()))?;
    let law = law.ok_or_else(|| Error::Parse("missing law descriptor".into()))?;
    Environment::from_parts(left, omegas, seed, law)
}

/// Binary format: version byte, left i64, right i64, seed u64, law tag byte +
/// param count byte + params, omega count u64, raw f64 array (all little endian).
pub fn write_binary<W: Write>(env: &Environment, mut out: W) -> Result<()> {
    out.write_all(&[BINARY_VERSION])?;
    out.write_all(&env.left().to_le_bytes())?;
    out.write_all(&env.right().to_le_bytes())?;
    out.write_all(&env.seed().to_le_bytes())?;
    let (tag, params) = law_tag(env.law().kind());
    out.write_all(&[tag, params.len() as u8])?;
    for p in &params {
        out.write_all(&p.to_le_bytes())?;
    }
    out.write_all(&(env.width() as u64).to_le_bytes())?;
    for w in env.omegas() {
        out.write_all(&w.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Environment> {
    fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        r.read_exact(&mut buf)?;
        Ok(buf)
    }
    let ver = take::<1, _>(&mut input)?[0];
    if ver != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported binary version {ver}")));
    }
    let left = i64::from_le_bytes(take(&mut input)?);
    let right = i64::from_le_bytes(take(&mut input)?);
    let seed = u64::from_le_bytes(take(&mut input)?);
    let [tag, np] = take::<2, _>(&mut input)?;
    let mut params = Vec::with_capacity(np as usize);
    for _ in 0..np {
        params.push(f64::from_le_bytes(take(&mut input)?));
    }
    let law = law_from_tag(tag, &params)?;
    let count = u64::from_le_bytes(take(&mut input)?) as usize;
    if right - left + 1 != count as i64 {
        return Err(Error::Parse(format!(
            "window [{left},{right}] disagrees with omega count {count}"
        )));
    }
    let mut omegas = Vec::with_capacity(count);
    for _ in 0..count {
        omegas.push(f64::from_le_bytes(take(&mut input)?));
    }
    Environment::from_parts(left, omegas, seed, law)
}
