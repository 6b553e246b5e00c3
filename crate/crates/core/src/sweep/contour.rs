use std::collections::HashMap;

use serde::Serialize;

/// A straight piece of a zero contour inside one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub cell: (usize, usize),
    pub start: (f64, f64),
    pub end: (f64, f64),
}

/// Zero level set of one field, as joined polylines plus the raw segments.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Contour {
    pub polylines: Vec<Vec<(f64, f64)>>,
    pub segments: Vec<Segment>,
}

// Edge of the grid crossed by the contour: (i, j, vertical) names the edge
// leaving node (i, j) in +p1 (horizontal) or +p2 (vertical) direction.
type EdgeKey = (usize, usize, bool);

/// Marching squares for the zero level of `values`, stored row-major as
/// `values[j * nx + i]` at `(xs[i], ys[j])`.
///
/// A node is "inside" when its value is positive. Cells with a NaN corner
/// are skipped. Saddle cells are resolved by the sign of the mean of the
/// four corners.
pub fn zero_contour(xs: &[f64], ys: &[f64], values: &[f64]) -> Contour {
    let (nx, ny) = (xs.len(), ys.len());
    assert_eq!(values.len(), nx * ny, "field size must match the grid");
    let at = |i: usize, j: usize| values[j * nx + i];
    let crossing = |(i, j, vertical): EdgeKey| -> (f64, f64) {
        let (i2, j2) = if vertical { (i, j + 1) } else { (i + 1, j) };
        let (v0, v1) = (at(i, j), at(i2, j2));
        let t = if v0 == v1 { 0.5 } else { v0 / (v0 - v1) };
        (xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j]))
    };

    let mut segments = Vec::new();
    let mut links: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let corners = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            if corners.iter().any(|v| v.is_nan()) {
                continue;
            }
            let inside = corners.map(|v| v > 0.0);
            // edges: bottom, right, top, left
            let edges: [EdgeKey; 4] = [(i, j, false), (i + 1, j, true), (i, j + 1, false), (i, j, true)];
            let ends = [(0, 1), (1, 2), (3, 2), (0, 3)];
            let cut: Vec<usize> = (0..4).filter(|&e| inside[ends[e].0] != inside[ends[e].1]).collect();
            let pairs: Vec<(usize, usize)> = match cut.len() {
                2 => vec![(cut[0], cut[1])],
                4 => {
                    let centre = corners.iter().sum::<f64>() / 4.0 > 0.0;
                    if centre == inside[0] {
                        // corners 1 and 3 are cut off
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(0, 3), (1, 2)]
                    }
                }
                _ => Vec::new(),
            };
            for (a, b) in pairs {
                let (ka, kb) = (edges[a], edges[b]);
                segments.push(Segment { cell: (i, j), start: crossing(ka), end: crossing(kb) });
                links.push((ka, kb));
            }
        }
    }

    Contour { polylines: join(&links, crossing), segments }
}

fn join(links: &[(EdgeKey, EdgeKey)], point: impl Fn(EdgeKey) -> (f64, f64)) -> Vec<Vec<(f64, f64)>> {
    let mut adjacency: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (n, &(a, b)) in links.iter().enumerate() {
        adjacency.entry(a).or_default().push(n);
        adjacency.entry(b).or_default().push(n);
    }
    let mut used = vec![false; links.len()];
    let mut out = Vec::new();

    let walk = |start_link: usize, from: EdgeKey, used: &mut Vec<bool>| {
        let mut keys = vec![from];
        let mut link = start_link;
        loop {
            used[link] = true;
            let (a, b) = links[link];
            let next = if a == *keys.last().unwrap_or(&a) { b } else { a };
            keys.push(next);
            match adjacency[&next].iter().find(|&&l| !used[l]) {
                Some(&l) => link = l,
                None => break,
            }
        }
        keys.into_iter().map(&point).collect::<Vec<_>>()
    };

    // open chains first, starting at edges touched by one segment only
    let mut order: Vec<usize> = (0..links.len()).collect();
    order.sort_by_key(|&n| {
        let (a, b) = links[n];
        let open = adjacency[&a].len() == 1 || adjacency[&b].len() == 1;
        (!open, n)
    });
    for n in order {
        if used[n] {
            continue;
        }
        let (a, b) = links[n];
        let from = if adjacency[&a].len() == 1 || adjacency[&b].len() != 1 { a } else { b };
        out.push(walk(n, from, &mut used));
    }
    out
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Intersection point of two segments, if they cross (endpoints included).
pub fn segment_intersection(p: &Segment, q: &Segment) -> Option<(f64, f64)> {
    let d1 = cross(q.start, q.end, p.start);
    let d2 = cross(q.start, q.end, p.end);
    let d3 = cross(p.start, p.end, q.start);
    let d4 = cross(p.start, p.end, q.end);
    if d1 * d2 > 0.0 || d3 * d4 > 0.0 {
        return None;
    }
    let denom = d1 - d2;
    if denom == 0.0 {
        // parallel or collinear; report the shared start if they touch
        return (d1 == 0.0 && d3 == 0.0).then_some(p.start);
    }
    let t = d1 / denom;
    Some((p.start.0 + t * (p.end.0 - p.start.0), p.start.1 + t * (p.end.1 - p.start.1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn circle_is_one_closed_loop() {
        let xs = grid(41, -2.0, 2.0);
        let ys = xs.clone();
        let f: Vec<f64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| 1.0 - x * x - y * y)).collect();
        let c = zero_contour(&xs, &ys, &f);
        assert_eq!(c.polylines.len(), 1);
        let line = &c.polylines[0];
        assert_eq!(line.first(), line.last());
        for &(x, y) in line {
            assert!((x.hypot(y) - 1.0).abs() < 0.01);
        }
    }

    #[test]
    fn line_is_open_and_exact() {
        let xs = grid(11, 0.0, 1.0);
        let ys = grid(7, 0.0, 1.0);
        let f: Vec<f64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| x - 0.33 + 0.0 * y)).collect();
        let c = zero_contour(&xs, &ys, &f);
        assert_eq!(c.polylines.len(), 1);
        assert_eq!(c.polylines[0].len(), 7);
        assert!(c.polylines[0].iter().all(|p| (p.0 - 0.33).abs() < 1e-12));
    }

    #[test]
    fn constant_sign_has_no_contour() {
        let c = zero_contour(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 2.0, 3.0, 4.0]);
        assert!(c.polylines.is_empty() && c.segments.is_empty());
    }

    #[test]
    fn saddle_uses_centre() {
        let xs = [0.0, 1.0];
        let c = zero_contour(&xs, &xs, &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(c.segments.len(), 2);
        let c = zero_contour(&xs, &xs, &[1.0, -2.0, -2.0, 1.0]);
        assert_eq!(c.segments.len(), 2);
    }

    #[test]
    fn nan_cells_are_skipped() {
        let c = zero_contour(&[0.0, 1.0], &[0.0, 1.0], &[1.0, -1.0, f64::NAN, -1.0]);
        assert!(c.segments.is_empty());
    }

    #[test]
    fn crossing_segments() {
        let p = Segment { cell: (0, 0), start: (0.0, 0.0), end: (1.0, 1.0) };
        let q = Segment { cell: (0, 0), start: (0.0, 1.0), end: (1.0, 0.0) };
        let x = segment_intersection(&p, &q).unwrap();
        assert!((x.0 - 0.5).abs() < 1e-15 && (x.1 - 0.5).abs() < 1e-15);
        let far = Segment { cell: (0, 0), start: (2.0, 0.0), end: (3.0, 1.0) };
        assert!(segment_intersection(&p, &far).is_none());
    }
}
