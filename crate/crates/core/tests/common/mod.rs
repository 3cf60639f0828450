//! Naive reference implementations, written from the formulas without
//! reusing any library code. Shared with the acceptance suite.
#![allow(dead_code)]

/// Double loop over interior samples and offsets 1..=3.
pub fn discontinuity(s: &[f64], dt: f64) -> f64 {
    let k = s.len() as isize - 1;
    let mut best = 0.0;
    for i in 0..=k.max(0) {
        for d in 1..=3isize {
            if i - d < 0 || i + d > k {
                continue;
            }
            let (i, d) = (i as usize, d as usize);
            let lc = ((s[i] - s[i - d]) / dt).abs();
            let rc = ((s[i + d] - s[i]) / dt).abs();
            let v = if lc < rc { lc } else { rc };
            if v > best {
                best = v;
            }
        }
    }
    best
}

pub fn instability(s: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 1..s.len() {
        total += (s[i] - s[i - 1]).abs();
    }
    total
}

pub fn infinity(s: &[f64]) -> f64 {
    let mut best = 0.0;
    for v in s {
        if v.abs() > best {
            best = v.abs();
        }
    }
    best
}

pub fn minmax(s: &[f64]) -> f64 {
    let mut lo = s[0];
    let mut hi = s[0];
    for &v in s {
        if v < lo {
            lo = v;
        }
        if v > hi {
            hi = v;
        }
    }
    hi - lo
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Per-test normalized scores from raw `[test][signal]` values.
pub fn normalize(raw: &[Vec<f64>]) -> Vec<f64> {
    let mut g = 0.0;
    for row in raw {
        for &v in row {
            if v > g {
                g = v;
            }
        }
    }
    raw.iter()
        .map(|row| {
            if g == 0.0 {
                0.0
            } else {
                row.iter().sum::<f64>() / (g * row.len() as f64)
            }
        })
        .collect()
}

/// Suite objective as the ratio of selected sum to full-suite sum.
pub fn ratio(values: &[f64], selection: &[bool]) -> f64 {
    let mut picked = 0.0;
    let mut all = 0.0;
    for (v, &s) in values.iter().zip(selection) {
        all += v;
        if s {
            picked += v;
        }
    }
    if all == 0.0 {
        0.0
    } else {
        picked / all
    }
}

/// Bit `i` of `mask` as a selection of `n` tests.
pub fn mask_selection(mask: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

/// `a` dominates `b`, where `w[i] = 1` maximizes goal `i` and `-1` minimizes it.
pub fn dominates(a: &[f64], b: &[f64], w: &[f64]) -> bool {
    let mut better = false;
    for i in 0..a.len() {
        let (x, y) = (w[i] * a[i], w[i] * b[i]);
        if x < y {
            return false;
        }
        if x > y {
            better = true;
        }
    }
    better
}

/// Non-dominated subset of `points` by pairwise comparison.
pub fn true_front(points: &[Vec<f64>], w: &[f64]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p, w)))
        .cloned()
        .collect()
}

/// Area dominated by 2-D minimization points and bounded by `reference`.
pub fn hypervolume_2d(points: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .copied()
        .collect();
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    let mut area = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            area += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    area
}

/// Cliff's delta by counting every pair.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> f64 {
    let mut more = 0i64;
    let mut less = 0i64;
    for x in a {
        for y in b {
            if x > y {
                more += 1;
            } else if x < y {
                less += 1;
            }
        }
    }
    (more - less) as f64 / (a.len() * b.len()) as f64
}

/// Largest E(Δ) over every cut of `groups`, computed from scratch per cut.
pub fn best_split(groups: &[Vec<f64>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..groups.len() {
        let left: Vec<f64> = groups[..cut].concat();
        let right: Vec<f64> = groups[cut..].concat();
        let all: Vec<f64> = groups.concat();
        let mu = all.iter().sum::<f64>() / all.len() as f64;
        let mut e = 0.0;
        for part in [&left, &right] {
            let m = part.iter().sum::<f64>() / part.len() as f64;
            e += part.len() as f64 / all.len() as f64 * (m - mu) * (m - mu);
        }
        match best {
            Some((_, b)) if e <= b => {}
            _ => best = Some((cut, e)),
        }
    }
    best
}
