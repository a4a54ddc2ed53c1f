//! Parsers for the CLI's value syntaxes: complex amplitudes, prior
//! specifications, and sweep ranges.

use std::fs;
use std::path::Path;

use relphase_core::{CircularPrior, C64};

use crate::{CliError, CliResult};

/// Complex amplitude literal: either a plain real (`1.0`, `-0.3`) or
/// modulus@phase-radians (`1.0@0.7`).
pub fn parse_complex(s: &str) -> CliResult<C64> {
    if let Some((modulus, phase)) = s.split_once('@') {
        let m: f64 = modulus
            .parse()
            .map_err(|_| CliError::Config(format!("bad modulus in complex literal '{s}'")))?;
        let p: f64 = phase
            .parse()
            .map_err(|_| CliError::Config(format!("bad phase in complex literal '{s}'")))?;
        if !m.is_finite() || m < 0.0 {
            return Err(CliError::Config(format!(
                "modulus must be finite and >= 0 in '{s}'"
            )));
        }
        if !p.is_finite() {
            return Err(CliError::Config(format!("phase must be finite in '{s}'")));
        }
        Ok(C64::from_polar(m, p))
    } else {
        let v: f64 = s
            .parse()
            .map_err(|_| CliError::Config(format!("bad complex literal '{s}'")))?;
        if !v.is_finite() {
            return Err(CliError::Config(format!("value must be finite in '{s}'")));
        }
        Ok(C64::new(v, 0.0))
    }
}

/// Render a complex amplitude back in the modulus@phase input form.
pub fn complex_spec(z: C64) -> String {
    format!("{}@{}", z.norm(), z.arg())
}

/// Circular prior specification: `flat`, `delta:<phi0>`,
/// `vonmises:<mu>,<kappa>`, or `grid:<path>` pointing at a CSV of
/// `point,weight` rows.
pub fn parse_prior(spec: &str) -> CliResult<CircularPrior> {
    if spec == "flat" {
        return Ok(CircularPrior::flat());
    }
    if let Some(arg) = spec.strip_prefix("delta:") {
        let phi0: f64 = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad delta prior '{spec}'")))?;
        return Ok(CircularPrior::delta(phi0));
    }
    if let Some(args) = spec.strip_prefix("vonmises:") {
        let (mu, kappa) = args.split_once(',').ok_or_else(|| {
            CliError::Config(format!("vonmises needs '<mu>,<kappa>' in '{spec}'"))
        })?;
        let mu: f64 = mu
            .parse()
            .map_err(|_| CliError::Config(format!("bad vonmises mu in '{spec}'")))?;
        let kappa: f64 = kappa
            .parse()
            .map_err(|_| CliError::Config(format!("bad vonmises kappa in '{spec}'")))?;
        return Ok(CircularPrior::von_mises(mu, kappa)?);
    }
    if let Some(path) = spec.strip_prefix("grid:") {
        let (points, weights) = read_grid_file(Path::new(path))?;
        return Ok(CircularPrior::grid(points, weights)?);
    }
    Err(CliError::Config(format!(
        "unknown prior '{spec}' (expected flat | delta:<phi0> | vonmises:<mu>,<kappa> | grid:<path>)"
    )))
}

fn read_grid_file(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read grid file {}: {e}", path.display())))?;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (p, w) = line.split_once(',').ok_or_else(|| {
            CliError::Config(format!(
                "grid file line {} needs 'point,weight'",
                lineno + 1
            ))
        })?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("bad point on grid file line {}", lineno + 1)))?;
        let w: f64 = w.trim().parse().map_err(|_| {
            CliError::Config(format!("bad weight on grid file line {}", lineno + 1))
        })?;
        points.push(p);
        weights.push(w);
    }
    Ok((points, weights))
}

/// Split a comma-separated prior list, keeping the comma inside
/// `vonmises:<mu>,<kappa>` attached to its prior.
pub fn split_prior_list(list: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut expect_kappa = false;
    for token in list.split(',') {
        if expect_kappa {
            let last = out.last_mut().expect("kappa follows a vonmises token");
            last.push(',');
            last.push_str(token);
            expect_kappa = false;
        } else {
            if token.starts_with("vonmises:") && !token.contains(',') {
                expect_kappa = true;
            }
            out.push(token.to_string());
        }
    }
    out
}

/// A prior over lattice displacements: one weight per site of `Z_d`. Reuses
/// the circular syntax with sites in place of angles: `flat`,
/// `delta:<site>`, `vonmises:<mu>,<kappa>` (density sampled at `2πX/d`),
/// `grid:<path>` with `site,weight` rows.
pub fn parse_lattice_prior(spec: &str, d: usize) -> CliResult<Vec<f64>> {
    if spec == "flat" {
        return Ok(vec![1.0 / d as f64; d]);
    }
    if let Some(arg) = spec.strip_prefix("delta:") {
        let x: f64 = arg
            .parse()
            .map_err(|_| CliError::Config(format!("bad delta shift '{spec}'")))?;
        if (x - x.round()).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "lattice delta prior needs an integer site, got '{spec}'"
            )));
        }
        let site = (x.round() as i64).rem_euclid(d as i64) as usize;
        let mut w = vec![0.0; d];
        w[site] = 1.0;
        return Ok(w);
    }
    if let Some(args) = spec.strip_prefix("vonmises:") {
        let (mu, kappa) = args.split_once(',').ok_or_else(|| {
            CliError::Config(format!("vonmises needs '<mu>,<kappa>' in '{spec}'"))
        })?;
        let mu: f64 = mu
            .parse()
            .map_err(|_| CliError::Config(format!("bad vonmises mu in '{spec}'")))?;
        let kappa: f64 = kappa
            .parse()
            .map_err(|_| CliError::Config(format!("bad vonmises kappa in '{spec}'")))?;
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(CliError::Config("vonmises kappa must be >= 0".to_string()));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let mut w: Vec<f64> = (0..d)
            .map(|x| (kappa * ((tau * x as f64 / d as f64 - mu).cos() - 1.0)).exp())
            .collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        return Ok(w);
    }
    if let Some(path) = spec.strip_prefix("grid:") {
        let (points, weights) = read_grid_file(Path::new(path))?;
        let mut w = vec![0.0; d];
        for (p, weight) in points.iter().zip(&weights) {
            if (p - p.round()).abs() > 1e-9 {
                return Err(CliError::Config(format!(
                    "lattice grid file needs integer sites, got {p}"
                )));
            }
            if *weight < 0.0 {
                return Err(CliError::Config(
                    "lattice grid weights must be >= 0".to_string(),
                ));
            }
            w[(p.round() as i64).rem_euclid(d as i64) as usize] += weight;
        }
        let total: f64 = w.iter().sum();
        if total <= 0.0 {
            return Err(CliError::Config(
                "lattice grid weights sum to zero".to_string(),
            ));
        }
        w.iter_mut().for_each(|v| *v /= total);
        return Ok(w);
    }
    Err(CliError::Config(format!("unknown lattice prior '{spec}'")))
}

/// Sweep range over a real modulus: a single value (`4`), a comma list
/// (`2,4,8`), a geometric range `start:stop:x<factor>`, or an arithmetic
/// range `start:stop:+<step>`. All inclusive of the stop point up to
/// rounding.
pub fn parse_range(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [list] => list
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad range value '{v}'")))
            })
            .collect::<CliResult<Vec<f64>>>()?,
        [start, stop, step] => {
            let start: f64 = start
                .parse()
                .map_err(|_| CliError::Config(format!("bad range start in '{spec}'")))?;
            let stop: f64 = stop
                .parse()
                .map_err(|_| CliError::Config(format!("bad range stop in '{spec}'")))?;
            let mut values = Vec::new();
            if let Some(factor) = step.strip_prefix('x') {
                let factor: f64 = factor
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad range factor in '{spec}'")))?;
                if factor <= 1.0 || start <= 0.0 {
                    return Err(CliError::Config(
                        "geometric range needs start > 0 and factor > 1".to_string(),
                    ));
                }
                let mut v = start;
                while v <= stop * (1.0 + 1e-12) {
                    values.push(v);
                    v *= factor;
                }
            } else if let Some(step) = step.strip_prefix('+') {
                let step: f64 = step
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad range step in '{spec}'")))?;
                if step <= 0.0 {
                    return Err(CliError::Config(
                        "arithmetic range needs step > 0".to_string(),
                    ));
                }
                let mut v = start;
                while v <= stop * (1.0 + 1e-12) {
                    values.push(v);
                    v += step;
                }
            } else {
                return Err(CliError::Config(format!(
                    "range step must begin with 'x' or '+' in '{spec}'"
                )));
            }
            values
        }
        _ => return Err(CliError::Config(format!("bad range '{spec}'"))),
    };
    if values.is_empty() {
        return Err(CliError::Config(format!(
            "range '{spec}' produced no points"
        )));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CliError::Config(format!(
            "range '{spec}' has negative or non-finite points"
        )));
    }
    Ok(values)
}
