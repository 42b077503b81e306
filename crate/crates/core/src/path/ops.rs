use super::{CadlagPath, KnotBuf, Terminal};
use crate::error::{Error, Result};

/// The path after its last global minimum, shifted to start at time 0 and
/// value 0. If the minimum is the left limit of a jump, the jump is kept.
///
/// Only meaningful when the minimum is final: the path must have been
/// stopped by a margin rule or killed.
pub fn post_minimum(path: &CadlagPath) -> Result<CadlagPath> {
    match path.terminal() {
        Terminal::InfiniteProxy | Terminal::Killed => {}
        _ => return Err(Error::MinNotSettled),
    }
    let knots = path.knots();
    if knots.is_empty() {
        return Ok(CadlagPath::empty().with_terminal(path.terminal()));
    }
    let m = path.inf();
    let i = knots.iter().rposition(|k| k.v == m).unwrap();
    let t0 = knots[i].t;
    let mut buf = KnotBuf::default();
    for k in &knots[i..] {
        buf.push(k.t - t0, k.v - m);
    }
    Ok(CadlagPath::from_parts(buf.knots, path.terminal(), path.mesh()))
}

/// Time change by the occupation clock of `(-inf, r]`: the parts of the
/// path above `r` are cut out and the rest glued together. The result has
/// lifetime `Leb{t : f(t) <= r}`.
pub fn time_change_below(path: &CadlagPath, r: f64) -> CadlagPath {
    let knots = path.knots();
    let mut buf = KnotBuf::default();
    let mut s = 0.0;
    for (i, a) in knots.iter().enumerate() {
        if a.v <= r {
            buf.push(s, a.v);
        }
        let Some(b) = knots.get(i + 1) else { break };
        let len = b.t - a.t;
        if len <= 0.0 {
            continue;
        }
        match (a.v <= r, b.v <= r) {
            (true, true) => s += len,
            (true, false) => {
                s += len * (r - a.v) / (b.v - a.v);
                buf.push(s, r);
            }
            (false, true) => {
                buf.push(s, r);
                s += len * (r - b.v) / (a.v - b.v);
            }
            (false, false) => {}
        }
    }
    CadlagPath::from_parts(buf.knots, path.terminal(), path.mesh())
}

/// Places paths end to end in time. Values are not shifted, so a mismatch
/// between consecutive end and start values becomes a jump. Paths of
/// lifetime 0 are skipped. Only the last path may be infinite.
pub fn concatenate(paths: &[CadlagPath]) -> Result<CadlagPath> {
    let mut buf = KnotBuf::default();
    let mut offset = 0.0;
    let mut mesh: Option<f64> = None;
    let mut terminal = Terminal::HitZero;
    let last = paths.len().saturating_sub(1);
    for (i, p) in paths.iter().enumerate() {
        if p.is_infinite() && i != last {
            return Err(Error::InfiniteInterior);
        }
        terminal = p.terminal();
        if p.lifetime() <= 0.0 {
            continue;
        }
        if let Some(h) = p.mesh() {
            mesh = Some(mesh.map_or(h, |m| m.max(h)));
        }
        for k in p.knots() {
            buf.push(offset + k.t, k.v);
        }
        offset += p.lifetime();
    }
    Ok(CadlagPath::from_parts(buf.knots, terminal, mesh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tent_is_truncated() {
        let p = CadlagPath::from_points(&[(0.0, 0.0), (2.0, 2.0), (4.0, 0.0)]);
        let q = time_change_below(&p, 1.0);
        let pts: Vec<(f64, f64)> = q.knots().iter().map(|k| (k.t, k.v)).collect();
        assert_eq!(pts, vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
    }

    #[test]
    fn jump_over_level_becomes_jump_to_level() {
        let p = CadlagPath::from_points(&[(0.0, 0.5), (1.0, 0.0), (1.0, 3.0), (4.0, 0.0)]);
        let q = time_change_below(&p, 1.0);
        assert!((q.lifetime() - 2.0).abs() < 1e-12);
        assert_eq!(q.jumps(), vec![(1.0, 1.0)]);
    }

    #[test]
    fn post_minimum_keeps_jump() {
        let p = CadlagPath::from_points(&[(0.0, 0.0), (1.0, -1.0), (1.0, 0.5), (2.0, 2.0)])
            .with_terminal(Terminal::InfiniteProxy);
        let q = post_minimum(&p).unwrap();
        assert_eq!(q.start_value(), Some(1.5));
        assert_eq!(q.left_limit(0.0), Some(1.5));
        assert_eq!(q.knots()[0].v, 0.0);
        assert!((q.lifetime() - 1.0).abs() < 1e-15);
        let unsettled = p.with_terminal(Terminal::Horizon);
        assert!(matches!(post_minimum(&unsettled), Err(Error::MinNotSettled)));
    }

    #[test]
    fn concatenation_rules() {
        let a = CadlagPath::from_points(&[(0.0, 1.0), (1.0, 0.0)]);
        let b = CadlagPath::from_points(&[(0.0, 2.0), (2.0, 0.0)]);
        let z = CadlagPath::from_points(&[(0.0, 5.0)]);
        let c = concatenate(&[a.clone(), z, b.clone()]).unwrap();
        assert_eq!(c.lifetime(), 3.0);
        assert_eq!(c.jumps(), vec![(1.0, 2.0)]);
        let inf = a.with_terminal(Terminal::InfiniteProxy);
        assert!(matches!(concatenate(&[inf, b]), Err(Error::InfiniteInterior)));
    }

    fn arb_path() -> impl Strategy<Value = CadlagPath> {
        proptest::collection::vec((0.0f64..1.0, -2.0f64..2.0, proptest::bool::ANY), 1..40).prop_map(|steps| {
            let mut t = 0.0;
            let mut pts = vec![(0.0, 0.0)];
            for (dt, v, jump) in steps {
                if !jump {
                    t += dt + 1e-3;
                }
                pts.push((t, v));
            }
            CadlagPath::from_points(&pts)
        })
    }

    proptest! {
        #[test]
        fn lifetime_is_occupation(p in arb_path(), r in -1.5f64..1.5) {
            let q = time_change_below(&p, r);
            prop_assert!((q.lifetime() - p.time_at_or_below(r)).abs() < 1e-9);
            prop_assert!(q.sup() <= r + 1e-12 || q.is_empty());
        }

        #[test]
        fn truncation_is_idempotent(p in arb_path(), r in -1.5f64..1.5) {
            let q = time_change_below(&p, r);
            let qq = time_change_below(&q, r);
            prop_assert!((q.lifetime() - qq.lifetime()).abs() < 1e-9);
            for i in 0..=10 {
                let t = q.lifetime() * i as f64 / 10.0;
                prop_assert!((q.value_at(t).unwrap_or(0.0) - qq.value_at(t).unwrap_or(0.0)).abs() < 1e-9);
            }
        }

        #[test]
        fn nested_truncations_compose(p in arb_path(), r in -1.5f64..1.5, d in 0.0f64..1.0) {
            let a = time_change_below(&time_change_below(&p, r + d), r);
            let b = time_change_below(&p, r);
            prop_assert!((a.lifetime() - b.lifetime()).abs() < 1e-9);
        }
    }
}
