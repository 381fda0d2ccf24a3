//! Parsers for the compact spec strings used on the command line and in
//! config files.

use rbfquad_core::genz::{GenzFamily, GenzFunction};
use rbfquad_core::pointsets::{Domain, PointSequence, PointSet};

pub type SpecResult<T> = Result<T, String>;

/// Domain spec: `lo:hi` (interval) or `lo:hi x lo:hi` (rectangle), e.g.
/// `0:1` or `0:1x0:1`.
pub fn parse_domain(s: &str) -> SpecResult<Domain> {
    let axes: Vec<&str> = s.split('x').collect();
    let parse_axis = |a: &str| -> SpecResult<(f64, f64)> {
        let (lo, hi) = a
            .split_once(':')
            .ok_or_else(|| format!("domain axis `{a}` must be lo:hi"))?;
        let lo: f64 = lo.trim().parse().map_err(|_| format!("bad bound `{lo}`"))?;
        let hi: f64 = hi.trim().parse().map_err(|_| format!("bad bound `{hi}`"))?;
        Ok((lo, hi))
    };
    match axes.as_slice() {
        [one] => {
            let (lo, hi) = parse_axis(one)?;
            Domain::interval(lo, hi).map_err(|e| e.to_string())
        }
        [x, y] => {
            let x = parse_axis(x)?;
            let y = parse_axis(y)?;
            Domain::rectangle(x, y).map_err(|e| e.to_string())
        }
        _ => Err(format!("domain `{s}` must have 1 or 2 axes")),
    }
}

/// Point-set spec: `equid:<n>`, `halton:<n>[:skip]`, `random:<n>:<seed>`.
/// For `equid` in 2D, `<n>` is the total grid size and must be a perfect
/// square.
pub fn parse_pointset(s: &str, domain: Domain) -> SpecResult<PointSet> {
    let parts: Vec<&str> = s.split(':').collect();
    let count = |idx: usize| -> SpecResult<usize> {
        parts
            .get(idx)
            .ok_or_else(|| format!("point spec `{s}` is missing a count"))?
            .parse()
            .map_err(|_| format!("bad count in point spec `{s}`"))
    };
    match parts.first().copied() {
        Some("equid") => {
            let n = count(1)?;
            let per_axis = match domain.dim() {
                1 => n,
                _ => {
                    let side = (n as f64).sqrt().round() as usize;
                    if side * side != n {
                        return Err(format!("equid:{n} in 2D needs a perfect square"));
                    }
                    side
                }
            };
            Ok(PointSet::equidistant(domain, per_axis))
        }
        Some("halton") => {
            let n = count(1)?;
            let skip = if parts.len() > 2 { count(2)? } else { 0 };
            Ok(PointSet::halton(domain, n, skip))
        }
        Some("random") => {
            let n = count(1)?;
            let seed: u64 = parts
                .get(2)
                .ok_or_else(|| format!("random point spec `{s}` needs a seed"))?
                .parse()
                .map_err(|_| format!("bad seed in `{s}`"))?;
            PointSet::random(domain, n, seed).map_err(|e| e.to_string())
        }
        _ => Err(format!(
            "unknown point spec `{s}` (use equid:<n>, halton:<n>[:skip], random:<n>:<seed>)"
        )),
    }
}

/// Data-sequence spec for the incremental constructions:
/// `halton[:skip]` or `random:<seed>`.
pub fn parse_sequence(s: &str) -> SpecResult<PointSequence> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        ["halton"] => Ok(PointSequence::Halton { skip: 0 }),
        ["halton", skip] => Ok(PointSequence::Halton {
            skip: skip.parse().map_err(|_| format!("bad skip in `{s}`"))?,
        }),
        ["random", seed] => Ok(PointSequence::Random {
            seed: seed.parse().map_err(|_| format!("bad seed in `{s}`"))?,
        }),
        _ => Err(format!(
            "unknown sequence `{s}` (use halton[:skip] or random:<seed>)"
        )),
    }
}

/// Grid spec for shape parameters or sizes:
/// - explicit list: `0.5,1,2`
/// - log grid: `log:<lo>:<hi>:<points_per_decade>`
/// - linear grid: `lin:<lo>:<hi>:<count>`
pub fn parse_grid(s: &str) -> SpecResult<Vec<f64>> {
    if let Some(rest) = s.strip_prefix("log:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(format!("log grid `{s}` needs log:<lo>:<hi>:<per_decade>"));
        }
        let lo: f64 = p[0].parse().map_err(|_| format!("bad `{}`", p[0]))?;
        let hi: f64 = p[1].parse().map_err(|_| format!("bad `{}`", p[1]))?;
        let per_decade: f64 = p[2].parse().map_err(|_| format!("bad `{}`", p[2]))?;
        if !(lo > 0.0 && hi > lo && per_decade > 0.0) {
            return Err(format!("log grid `{s}` needs 0 < lo < hi"));
        }
        let n = ((hi / lo).log10() * per_decade).ceil() as usize;
        let mut grid: Vec<f64> = (0..=n)
            .map(|i| lo * 10f64.powf(i as f64 / per_decade))
            .take_while(|v| *v <= hi * (1.0 + 1e-12))
            .collect();
        if *grid.last().unwrap() < hi * (1.0 - 1e-12) {
            grid.push(hi);
        }
        Ok(grid)
    } else if let Some(rest) = s.strip_prefix("lin:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(format!("lin grid `{s}` needs lin:<lo>:<hi>:<count>"));
        }
        let lo: f64 = p[0].parse().map_err(|_| format!("bad `{}`", p[0]))?;
        let hi: f64 = p[1].parse().map_err(|_| format!("bad `{}`", p[1]))?;
        let count: usize = p[2].parse().map_err(|_| format!("bad `{}`", p[2]))?;
        if count < 2 || hi <= lo {
            return Err(format!("lin grid `{s}` needs count >= 2 and hi > lo"));
        }
        Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        s.split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad grid entry `{v}`"))
            })
            .collect()
    }
}

/// Comma list of nonnegative integers, e.g. degree or size lists. Degrees
/// may include `-1`.
pub fn parse_int_list(s: &str) -> SpecResult<Vec<i64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| format!("bad integer `{v}`"))
        })
        .collect()
}

/// Integrand spec:
/// - `genz:<family>:<seed>` with family in 1..=4 (parameters drawn per
///   trial from seed, seed+1, ...)
/// - `genz:<family>:a=<v1,v2>:b=<v1,v2>` with explicit parameters
pub enum IntegrandSpec {
    Seeded { family: GenzFamily, seed: u64 },
    Explicit(GenzFunction),
}

impl IntegrandSpec {
    /// The integrand for a given trial index; explicit parameters ignore
    /// the trial.
    pub fn for_trial(&self, q: usize, trial: u64) -> GenzFunction {
        match self {
            IntegrandSpec::Seeded { family, seed } => {
                GenzFunction::random(*family, q, seed.wrapping_add(trial))
            }
            IntegrandSpec::Explicit(g) => g.clone(),
        }
    }

    pub fn is_seeded(&self) -> bool {
        matches!(self, IntegrandSpec::Seeded { .. })
    }
}

pub fn parse_integrand(s: &str) -> SpecResult<IntegrandSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.first() != Some(&"genz") || parts.len() < 3 {
        return Err(format!(
            "unknown integrand `{s}` (use genz:<1-4>:<seed> or genz:<1-4>:a=..:b=..)"
        ));
    }
    let family_idx: usize = parts[1]
        .parse()
        .map_err(|_| format!("bad genz family `{}`", parts[1]))?;
    let family = GenzFamily::from_index(family_idx)
        .ok_or_else(|| format!("genz family must be 1..=4, got {family_idx}"))?;
    if parts[2].starts_with("a=") {
        let vec_of = |p: &str, tag: &str| -> SpecResult<Vec<f64>> {
            p.strip_prefix(tag)
                .ok_or_else(|| format!("expected `{tag}...` in `{s}`"))?
                .split(',')
                .map(|v| v.parse::<f64>().map_err(|_| format!("bad value `{v}`")))
                .collect()
        };
        let a = vec_of(parts[2], "a=")?;
        let b = vec_of(
            parts
                .get(3)
                .ok_or_else(|| format!("integrand `{s}` is missing b=..."))?,
            "b=",
        )?;
        if a.len() != b.len() || !matches!(a.len(), 1 | 2) {
            return Err(format!("integrand `{s}`: a and b need equal length 1 or 2"));
        }
        Ok(IntegrandSpec::Explicit(GenzFunction::new(family, a, b)))
    } else {
        let seed: u64 = parts[2]
            .parse()
            .map_err(|_| format!("bad seed `{}`", parts[2]))?;
        Ok(IntegrandSpec::Seeded { family, seed })
    }
}
