use crate::error::{Error, Result};
use crate::path::{CadlagPath, KnotBuf, RangeMin};

const TOL: f64 = 1e-12;

/// The tree coded by a càdlàg function `f` on `[0, m]` with `f(m) = 0`:
/// `d(s, t) = f(s) + f(t) - 2 inf_{[s, t]} f`, ordered by the sup of each
/// class and measured by Lebesgue measure on `[0, m]`.
pub struct TomTreeView<'a> {
    rmq: RangeMin<'a>,
}

impl<'a> TomTreeView<'a> {
    pub fn new(coding: &'a CadlagPath) -> Self {
        TomTreeView {
            rmq: RangeMin::new(coding),
        }
    }

    pub fn coding(&self) -> &CadlagPath {
        self.rmq.path()
    }

    /// Total mass `m`, also the time coding the root.
    pub fn mass(&self) -> f64 {
        self.coding().lifetime()
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..=self.mass()).contains(&t) || self.coding().is_empty() {
            return Err(Error::OutOfDomain { t, m: self.mass() });
        }
        Ok(())
    }

    pub fn height(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.coding().value_at(t).unwrap())
    }

    pub fn distance(&self, s: f64, t: f64) -> Result<f64> {
        self.check(s)?;
        self.check(t)?;
        let f = self.coding();
        let m = self.rmq.min_over(s, t).unwrap();
        Ok(f.value_at(s).unwrap() + f.value_at(t).unwrap() - 2.0 * m)
    }

    pub fn same_point(&self, s: f64, t: f64) -> Result<bool> {
        Ok(self.distance(s, t)?.abs() <= TOL)
    }

    /// Largest time coding the same point as `t`.
    pub fn canonical(&self, t: f64) -> Result<f64> {
        let h = self.height(t)?;
        let knots = self.coding().knots();
        let mut best = t;
        let start = knots.partition_point(|k| k.t <= t);
        let mut prev_t = t;
        let mut prev_v = h;
        for k in &knots[start..] {
            if k.t == prev_t {
                // Jump: only upward, cannot leave the class from above.
                prev_v = k.v;
                continue;
            }
            if k.v < h - TOL {
                if prev_v >= h - TOL {
                    let s = prev_t + (prev_v - h) / (prev_v - k.v) * (k.t - prev_t);
                    best = best.max(s);
                }
                return Ok(best);
            }
            if (k.v - h).abs() <= TOL {
                best = k.t;
            }
            prev_t = k.t;
            prev_v = k.v;
        }
        Ok(best)
    }

    /// Tree order on times: compares canonical representatives.
    pub fn precedes(&self, s: f64, t: f64) -> Result<bool> {
        Ok(self.canonical(s)? < self.canonical(t)? - TOL)
    }

    /// A time coding the ancestor of `t` at height `h <= f(t)`.
    pub fn ancestor(&self, t: f64, h: f64) -> Result<f64> {
        let ft = self.height(t)?;
        if h > ft + TOL || h < 0.0 {
            return Err(Error::InvalidSite(format!(
                "height {h} not on the ancestral line of {t}"
            )));
        }
        let knots = self.coding().knots();
        let start = knots.partition_point(|k| k.t <= t);
        let (mut pt, mut pv) = (t, ft);
        if pv <= h {
            return Ok(t);
        }
        for k in &knots[start..] {
            if k.t > pt && k.v <= h {
                return Ok(pt + (pv - h) / (pv - k.v) * (k.t - pt));
            }
            pt = k.t;
            pv = k.v;
        }
        Ok(self.mass())
    }

    /// Number of tree points at height `h`.
    pub fn points_at_height(&self, h: f64) -> usize {
        let f = self.coding();
        let mut n = f
            .pieces()
            .iter()
            .filter(|p| {
                let end = p.start_value + p.slope * (p.end_time - p.start_time);
                p.start_value >= h && end < h
            })
            .count();
        if f.end_value().is_some_and(|v| (v - h).abs() <= TOL) {
            n += 1;
        }
        n
    }
}

/// Grafts the tree coded by `guest` to the right of the point coded by
/// `site` in the tree coded by `host`, returning the spliced coding.
pub fn graft_right(host: &CadlagPath, site: f64, guest: &CadlagPath) -> Result<CadlagPath> {
    if guest.lifetime() <= 0.0 {
        return Ok(host.clone());
    }
    if host.is_empty() || !(0.0..=host.lifetime()).contains(&site) {
        return Err(Error::InvalidSite(format!(
            "site {site} outside [0, {}]",
            host.lifetime()
        )));
    }
    let sigma = TomTreeView::new(host).canonical(site)?;
    let base = host.value_at(sigma).unwrap();
    let m2 = guest.lifetime();
    let mut buf = KnotBuf::default();
    for k in host.knots().iter().take_while(|k| k.t < sigma) {
        buf.push(k.t, k.v);
    }
    buf.push(sigma, host.left_limit(sigma).unwrap());
    buf.push(sigma, base);
    for k in guest.knots() {
        buf.push(sigma + k.t, base + k.v);
    }
    buf.push(sigma + m2, base);
    for k in host.knots().iter().skip_while(|k| k.t < sigma) {
        buf.push(k.t + m2, k.v);
    }
    let mesh = match (host.mesh(), guest.mesh()) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    Ok(CadlagPath::from_knots(buf.knots, host.terminal(), mesh))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(p: &[(f64, f64)]) -> CadlagPath {
        CadlagPath::from_points(p)
    }

    #[test]
    fn metric_examples() {
        let tent = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let v = TomTreeView::new(&tent);
        assert_eq!(v.distance(0.5, 1.5).unwrap(), 0.0);
        assert_eq!(v.distance(0.7, 0.7).unwrap(), 0.0);
        assert!(v.distance(2.5, 0.0).is_err());
        let zig = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 1.5), (4.0, 0.0)]);
        let v = TomTreeView::new(&zig);
        assert_eq!(v.distance(1.0, 3.0).unwrap(), 1.5);
    }

    #[test]
    fn canonical_representatives() {
        let tent = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]);
        let v = TomTreeView::new(&tent);
        assert!((v.canonical(0.5).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(v.canonical(0.0).unwrap(), 2.0);
        assert!(v.precedes(1.2, 0.5).unwrap());
        assert!((v.ancestor(1.0, 0.25).unwrap() - 1.75).abs() < 1e-12);
    }

    #[test]
    fn graft_segment() {
        let host = pts(&[(0.0, 2.0), (2.0, 0.0)]);
        let guest = pts(&[(0.0, 1.0), (1.0, 0.0)]);
        let g = graft_right(&host, 1.0, &guest).unwrap();
        assert_eq!(g.lifetime(), 3.0);
        assert_eq!(g.sup(), 2.0);
        let v = TomTreeView::new(&g);
        assert_eq!(v.points_at_height(1.5), 2);
        // Root is the final time; the guest leaf is coded at time 1.
        assert!((v.distance(3.0, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(graft_right(&host, 1.0, &CadlagPath::empty()).unwrap(), host);
        assert!(graft_right(&host, 5.0, &guest).is_err());
    }

    fn arb_excursion() -> impl Strategy<Value = CadlagPath> {
        proptest::collection::vec((0.01f64..1.0, 0.0f64..2.0, proptest::bool::ANY), 1..20).prop_map(|steps| {
            let mut t = 0.0;
            let mut p = vec![(0.0, 1.0)];
            for (dt, v, jump) in steps {
                let last = p.last().unwrap().1;
                if jump && v > last {
                    p.push((t, v));
                } else {
                    t += dt;
                    p.push((t, v));
                }
            }
            t += 1.0;
            p.push((t, 0.0));
            CadlagPath::from_points(&p)
        })
    }

    proptest! {
        #[test]
        fn four_point_condition(p in arb_excursion(), u in proptest::collection::vec(0.0f64..1.0, 4)) {
            let v = TomTreeView::new(&p);
            let m = v.mass();
            let [w, x, y, z] = [u[0] * m, u[1] * m, u[2] * m, u[3] * m];
            let d = |a, b| v.distance(a, b).unwrap();
            prop_assert!(d(w, x) >= -1e-12);
            prop_assert!(d(w, y) <= d(w, x) + d(x, y) + 1e-9);
            let lhs = d(w, x) + d(y, z);
            let rhs = (d(w, y) + d(x, z)).max(d(w, z) + d(x, y));
            prop_assert!(lhs <= rhs + 1e-9);
        }

        #[test]
        fn canonical_is_same_point(p in arb_excursion(), u in 0.0f64..1.0) {
            let v = TomTreeView::new(&p);
            let t = u * v.mass();
            let c = v.canonical(t).unwrap();
            prop_assert!(c >= t);
            prop_assert!(v.distance(t, c).unwrap().abs() < 1e-9);
        }

        #[test]
        fn graft_adds_mass(p in arb_excursion(), q in arb_excursion(), u in 0.0f64..1.0) {
            let g = graft_right(&p, u * p.lifetime(), &q).unwrap();
            prop_assert!((g.lifetime() - p.lifetime() - q.lifetime()).abs() < 1e-9);
        }

        #[test]
        fn order_axiom(p in arb_excursion(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            // The branch point of two points never comes after either of them.
            let v = TomTreeView::new(&p);
            let (s, t) = (a * v.mass(), b * v.mass());
            let meet_h = p.min_over(s, t).unwrap();
            let anc = v.ancestor(s, meet_h).unwrap();
            let c = v.canonical(anc).unwrap();
            prop_assert!(c + 1e-9 >= v.canonical(s).unwrap());
        }
    }
}
