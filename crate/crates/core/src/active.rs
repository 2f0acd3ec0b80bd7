//! Segmentations for the active intermediary, who instructs the seller to
//! charge a revenue-maximizing price among the regulated ones.
//!
//! The consumer-optimal and welfare-minimal schemes share one segmentation:
//! squash the aggregate onto the window (drop mass below it, pile mass
//! above it onto the top value), run the unregulated decomposition there,
//! then spread each piece's top-value mass back over the original upper
//! tail. They differ only in whether each segment is priced at the lowest
//! or highest window value it contains.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::market::{IndexSet, Market, RegulatedSet};
use crate::passive::{bbm_segment, Construction};
use crate::rational::Rational;
use crate::scheme::{MarketScheme, Segment};

/// Scalar bounds of the active surplus region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveBenchmarks {
    /// Best uniform revenue using a window price.
    pub r_uniform_f: Rational,
    /// Surplus left to buyers above the window when everyone else pays
    /// their value.
    pub cs_a_min: Rational,
    pub sw_max: Rational,
}

pub fn active_benchmarks(aggregate: &Market, window: RegulatedSet) -> Result<ActiveBenchmarks> {
    if aggregate.is_zero() {
        return Err(Error::ZeroMarket);
    }
    aggregate.grid().check_index(window.hi())?;
    Ok(ActiveBenchmarks {
        r_uniform_f: aggregate.uniform_revenue_within(window),
        cs_a_min: surplus_above_top(aggregate, window),
        sw_max: aggregate.welfare_from(window.lo()),
    })
}

fn surplus_above_top(aggregate: &Market, window: RegulatedSet) -> Rational {
    let top = aggregate.value(window.hi());
    (window.hi() + 1..aggregate.len())
        .map(|i| aggregate.mass_at(i) * (aggregate.value(i) - top))
        .sum()
}

/// One segment per window price: everything at or below the floor is sold
/// at the floor, everything at or above the ceiling at the ceiling, and each
/// value strictly inside is isolated and sold at itself.
pub fn ps_max_active(aggregate: &Market, window: RegulatedSet) -> Result<MarketScheme> {
    if aggregate.is_zero() {
        return Err(Error::ZeroMarket);
    }
    aggregate.grid().check_index(window.hi())?;
    let (lo, hi) = (window.lo(), window.hi());
    let segments = window
        .indices()
        .map(|price| {
            let keep = |i: usize| {
                if lo == hi {
                    true
                } else if price == lo {
                    i <= lo
                } else if price == hi {
                    i >= hi
                } else {
                    i == price
                }
            };
            let masses = (0..aggregate.len())
                .map(|i| if keep(i) { aggregate.mass_at(i).clone() } else { Rational::zero() })
                .collect();
            let market = Market::new(aggregate.grid().clone(), masses)?;
            Ok(Segment::new(market, price))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarketScheme::new(aggregate.clone(), segments))
}

/// Aggregate squashed onto the window: zero outside it, unchanged strictly
/// inside, and the whole upper tail mass at the top window value.
pub fn modified_market(aggregate: &Market, window: RegulatedSet) -> Result<Market> {
    aggregate.grid().check_index(window.hi())?;
    if !aggregate.demand_at(window.lo()).is_positive() {
        return Err(Error::EmptyAboveFloor);
    }
    let masses = (0..aggregate.len())
        .map(|i| {
            if i == window.hi() {
                aggregate.demand_at(i)
            } else if window.contains(i) {
                aggregate.mass_at(i).clone()
            } else {
                Rational::zero()
            }
        })
        .collect();
    Market::new(aggregate.grid().clone(), masses)
}

/// A piece of the squashed decomposition and its lift to the aggregate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedSegment {
    pub squashed: Market,
    pub lifted: Market,
}

impl LiftedSegment {
    /// Window values carrying mass in the squashed piece. Revenue at any of
    /// them is the same for the lifted segment, and these are the prices an
    /// instruction may use.
    pub fn window_support(&self) -> IndexSet {
        self.squashed.support()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedSegmentation {
    pub modified: Market,
    /// Unregulated decomposition of the modified market.
    pub base: Construction,
    pub segments: Vec<LiftedSegment>,
}

/// Builds the shared segmentation and checks, for every lifted piece, that
/// the window's optimal prices sit in its support and that revenue is flat
/// across its window support.
pub fn lifted_segmentation(aggregate: &Market, window: RegulatedSet) -> Result<LiftedSegmentation> {
    let modified = modified_market(aggregate, window)?;
    let base = bbm_segment(&modified)?;
    let (lo, hi) = (window.lo(), window.hi());
    let tail = aggregate.demand_at(hi);
    let targets = aggregate.opt_prices_restricted(window)?;

    let mut segments = Vec::with_capacity(base.scheme.segments.len());
    for (q, piece) in base.scheme.segments.iter().enumerate() {
        let squashed = &piece.market;
        let top_mass = squashed.mass_at(hi);
        let masses = (0..aggregate.len())
            .map(|i| {
                if i < lo {
                    if q == 0 {
                        aggregate.mass_at(i).clone()
                    } else {
                        Rational::zero()
                    }
                } else if i < hi {
                    squashed.mass_at(i).clone()
                } else if top_mass.is_zero() {
                    // nothing sits at the top, so nothing to spread
                    Rational::zero()
                } else {
                    top_mass * aggregate.mass_at(i) / &tail
                }
            })
            .collect();
        let lifted = Market::new(aggregate.grid().clone(), masses)?;
        let segment = LiftedSegment { squashed: squashed.clone(), lifted };
        check_flat_revenue(&segment, &targets)?;
        segments.push(segment);
    }

    let total = segments
        .iter()
        .try_fold(Market::zero(aggregate.grid().clone()), |acc, s| acc.checked_add(&s.lifted))?;
    if &total != aggregate {
        return Err(Error::Invariant("lifted segments do not add up to the aggregate".into()));
    }
    Ok(LiftedSegmentation { modified, base, segments })
}

fn check_flat_revenue(segment: &LiftedSegment, targets: &IndexSet) -> Result<()> {
    let support = segment.window_support();
    if !targets.is_subset(&support) {
        return Err(Error::Invariant(format!(
            "window-optimal prices {targets:?} missing from segment support {support:?}"
        )));
    }
    let mut revenues = support.iter().map(|&i| segment.lifted.revenue_at(i));
    if let Some(first) = revenues.next() {
        if revenues.any(|r| r != first) {
            return Err(Error::Invariant("revenue is not flat across the window support".into()));
        }
    }
    Ok(())
}

fn price_each(
    aggregate: &Market,
    window: RegulatedSet,
    pick: impl Fn(&IndexSet) -> usize,
) -> Result<MarketScheme> {
    let shared = lifted_segmentation(aggregate, window)?;
    let segments = shared
        .segments
        .into_iter()
        .map(|s| {
            let price = pick(&s.window_support());
            Segment::new(s.lifted, price)
        })
        .collect();
    Ok(MarketScheme::new(aggregate.clone(), segments))
}

/// Consumer-optimal instructed scheme: each segment priced at its lowest
/// window value.
pub fn cs_max_active(aggregate: &Market, window: RegulatedSet) -> Result<MarketScheme> {
    price_each(aggregate, window, |s| *s.first().expect("pieces are non-zero"))
}

/// Welfare-minimal instructed scheme: same segments, each priced at its
/// highest window value.
pub fn sw_min_active(aggregate: &Market, window: RegulatedSet) -> Result<MarketScheme> {
    price_each(aggregate, window, |s| *s.last().expect("pieces are non-zero"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::ValueGrid;
    use crate::rational::{int, parse_rational};
    use crate::scheme::{scheme_surplus, validate_scheme, Model};

    fn mk(masses: [&str; 4]) -> Market {
        let grid = ValueGrid::new(vec![int(1), int(2), int(3), int(6)]).unwrap();
        Market::new(grid, masses.map(|s| parse_rational(s).unwrap()).to_vec()).unwrap()
    }

    fn m1() -> Market {
        mk(["0.36", "0.20", "0.18", "0.26"])
    }

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn f(lo: usize, hi: usize) -> RegulatedSet {
        RegulatedSet::new(lo, hi, 4).unwrap()
    }

    #[test]
    fn benchmarks_on_the_running_example() {
        let b = active_benchmarks(&m1(), f(1, 2)).unwrap();
        assert_eq!(b.r_uniform_f, q("1.32"));
        assert_eq!(b.cs_a_min, q("0.78"));
        assert_eq!(b.sw_max, q("2.50"));
        assert_eq!(active_benchmarks(&m1(), f(0, 3)).unwrap().r_uniform_f, q("1.56"));
        assert_eq!(active_benchmarks(&m1(), f(3, 3)).unwrap().cs_a_min, q("0"));
        assert_eq!(active_benchmarks(&mk(["0", "0", "0", "0"]), f(1, 2)), Err(Error::ZeroMarket));
    }

    #[test]
    fn seller_optimal_isolates_window_values() {
        let z = ps_max_active(&m1(), f(1, 2)).unwrap();
        assert_eq!(z.segments[0], Segment::new(mk(["0.36", "0.20", "0", "0"]), 1));
        assert_eq!(z.segments[1], Segment::new(mk(["0", "0", "0.18", "0.26"]), 2));
        let s = scheme_surplus(&z).unwrap();
        assert_eq!((s.cs, s.ps), (q("0.78"), q("1.72")));
        assert!(validate_scheme(&z, f(1, 2), Model::Active).is_valid());

        let single = ps_max_active(&m1(), f(2, 2)).unwrap();
        assert_eq!(single.segments, vec![Segment::new(m1(), 2)]);

        let wide = ps_max_active(&m1(), f(0, 3)).unwrap();
        assert_eq!(wide.segments.len(), 4);
        assert_eq!(wide.segments[1].market, mk(["0", "0.20", "0", "0"]));
        assert!(validate_scheme(&wide, f(0, 3), Model::Active).is_valid());
    }

    #[test]
    fn modified_market_examples() {
        assert_eq!(modified_market(&m1(), f(1, 2)).unwrap(), mk(["0", "0.20", "0.44", "0"]));
        assert_eq!(modified_market(&m1(), f(0, 3)).unwrap(), m1());
        assert_eq!(modified_market(&mk(["0.5", "0", "0", "0.5"]), f(1, 2)).unwrap(), mk(["0", "0", "0.5", "0"]));
        assert_eq!(modified_market(&mk(["0.5", "0", "0", "0"]), f(1, 2)), Err(Error::EmptyAboveFloor));
    }

    #[test]
    fn buyer_optimal_and_welfare_minimal_share_segments() {
        let cs = cs_max_active(&m1(), f(1, 2)).unwrap();
        let sw = sw_min_active(&m1(), f(1, 2)).unwrap();
        assert_eq!(cs.segments.len(), sw.segments.len());
        for (a, b) in cs.segments.iter().zip(&sw.segments) {
            assert_eq!(a.market, b.market);
        }
        let (a, b) = (scheme_surplus(&cs).unwrap(), scheme_surplus(&sw).unwrap());
        assert_eq!((a.cs, a.ps), (q("1.18"), q("1.32")));
        assert_eq!((b.cs, b.ps), (q("0.78"), q("1.32")));
        assert!(validate_scheme(&cs, f(1, 2), Model::Active).is_valid());
        assert!(validate_scheme(&sw, f(1, 2), Model::Active).is_valid());
    }

    #[test]
    fn singleton_window_prices_agree() {
        let cs = cs_max_active(&m1(), f(2, 2)).unwrap();
        let sw = sw_min_active(&m1(), f(2, 2)).unwrap();
        assert_eq!(cs, sw);
    }

    #[test]
    fn empty_top_value_spreads_nothing() {
        // no mass at or above the top window value
        let x = mk(["0.3", "0.4", "0", "0"]);
        let z = cs_max_active(&x, f(0, 2)).unwrap();
        assert!(validate_scheme(&z, f(0, 2), Model::Active).is_valid());
        assert_eq!(scheme_surplus(&z).unwrap().ps, x.uniform_revenue_within(f(0, 2)));
    }

    #[test]
    fn top_value_empty_but_tail_above() {
        // x*_r = 0 while buyers above the window exist
        let x = mk(["0.2", "0.3", "0", "0.5"]);
        let cs = cs_max_active(&x, f(1, 2)).unwrap();
        let sw = sw_min_active(&x, f(1, 2)).unwrap();
        for z in [&cs, &sw] {
            assert!(validate_scheme(z, f(1, 2), Model::Active).is_valid());
        }
        let b = active_benchmarks(&x, f(1, 2)).unwrap();
        assert_eq!(scheme_surplus(&sw).unwrap().cs, b.cs_a_min);
        assert_eq!(scheme_surplus(&cs).unwrap().cs, &b.sw_max - &b.r_uniform_f);
    }
}
