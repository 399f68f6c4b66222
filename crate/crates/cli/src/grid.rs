//! Grid and list arguments.
//!
//! Two spellings are accepted for one-dimensional grids: an explicit comma
//! list (`10,20,50`, scientific notation allowed) and a geometric range
//! `lo:hi` filled with four points per decade, always ending exactly at
//! `hi`. Row-size grids are rounded to integers and deduplicated after
//! rounding.

/// Comma-separated finite numbers.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("cannot read '{t}' as a finite number"))
        })
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty list".into());
    }
    Ok(values)
}

fn geometric(lo: f64, hi: f64) -> Result<Vec<f64>, String> {
    if !(lo > 0.0 && hi.is_finite() && hi >= lo) {
        return Err(format!("range needs 0 < lo <= hi, got {lo}:{hi}"));
    }
    let mut values = Vec::new();
    let mut i = 0u32;
    loop {
        let x = lo * 10f64.powf(f64::from(i) / 4.0);
        if x >= hi * (1.0 - 1e-12) {
            break;
        }
        values.push(x);
        i += 1;
    }
    values.push(hi);
    Ok(values)
}

/// Row sizes: comma list or `lo:hi` geometric range, strictly increasing.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, String> {
    let raw = if let Some((lo, hi)) = s.split_once(':') {
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| format!("cannot read '{lo}' as a number"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| format!("cannot read '{hi}' as a number"))?;
        geometric(lo, hi)?
    } else {
        parse_f64_list(s)?
    };
    let mut grid = Vec::with_capacity(raw.len());
    for v in raw {
        if !(v >= 0.5 && v < 1e18) {
            return Err(format!("row size {v} is out of range"));
        }
        let n = v.round() as usize;
        if grid.last() == Some(&n) {
            continue;
        }
        if grid.last().is_some_and(|&prev| n <= prev) {
            return Err("row sizes must be strictly increasing".into());
        }
        grid.push(n.max(1));
    }
    Ok(grid)
}

/// `lo:hi:step` with positive step and `lo <= hi`.
pub fn parse_range_step(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected lo:hi:step, got '{s}'"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("cannot read '{t}' as a finite number"))
        })
        .collect::<Result<_, _>>()?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0 && hi >= lo) {
        return Err(format!("range needs lo <= hi and step > 0, got '{s}'"));
    }
    Ok((lo, hi, step))
}
