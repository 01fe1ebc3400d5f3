//! Parsing of `--x` grids and integer lists.

/// `a:b:step` (inclusive of `b` up to rounding) or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{spec}` must look like start:stop:step"));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number `{s}` in grid: {e}"));
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || !a.is_finite() || !b.is_finite() || b < a {
            return Err(format!("grid `{spec}` needs finite start <= stop and a positive step"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 10_000_000 {
            return Err(format!("grid `{spec}` has too many points"));
        }
        Ok((0..count).map(|i| a + step * i as f64).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("bad number `{s}` in grid: {e}")))
            .collect()
    }
}

pub fn parse_int_list(spec: &str) -> Result<Vec<u64>, String> {
    spec.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<u64>().or_else(|_| {
                // allow 1e6 style
                let v: f64 = s.parse().map_err(|e| format!("bad integer `{s}`: {e}"))?;
                if v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
                    Ok(v as u64)
                } else {
                    Err(format!("bad integer `{s}`"))
                }
            })
        })
        .collect()
}
