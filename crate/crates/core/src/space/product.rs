//! Finite product of model spaces with the l2 product metric
//! `d((x_i), (y_i)) = sqrt(sum_i d_i(x_i, y_i)^2)`.
//!
//! A product of CAT(0) spaces is CAT(0), and its constant-speed geodesics
//! are exactly the factor geodesics traversed with one shared parameter.

use rand_chacha::ChaCha8Rng;

use crate::descriptor::{CoordNode, Descriptor};
use crate::error::{Error, Result};

use super::{Coords, ModelSpace, Space, SpaceRegistry};

#[derive(Debug)]
pub struct ProductSpace {
    factors: Vec<Space>,
}

impl ProductSpace {
    pub fn new(factors: Vec<Space>) -> Result<Space> {
        if factors.len() < 2 {
            return Err(Error::usage("product space needs at least two factors"));
        }
        Ok(Space::new(ProductSpace { factors }))
    }

    pub fn factors(&self) -> &[Space] {
        &self.factors
    }

    fn parts<'a>(&self, c: &'a Coords) -> &'a [Coords] {
        match c {
            Coords::Product(parts) => parts,
            other => panic!("product space got {other:?}"),
        }
    }
}

pub(super) fn build(d: &Descriptor) -> Result<Space> {
    d.expect_keys(&["kind", "factors"])?;
    let registry = SpaceRegistry::builtin();
    let mut factors = Vec::new();
    for item in d.list("factors")? {
        factors.push(registry.build(&item)?);
    }
    ProductSpace::new(factors)
}

impl ModelSpace for ProductSpace {
    fn kind(&self) -> &'static str {
        "product"
    }

    fn descriptor(&self) -> String {
        let inner: Vec<String> = self.factors.iter().map(|f| f.descriptor()).collect();
        format!("kind=product,factors=[{}]", inner.join(";"))
    }

    fn validate(&self, c: &Coords) -> Result<()> {
        match c {
            Coords::Product(parts) => {
                if parts.len() != self.factors.len() {
                    return Err(Error::InvalidCoords(format!(
                        "product expects {} factor coordinates, got {}",
                        self.factors.len(),
                        parts.len()
                    )));
                }
                for (f, p) in self.factors.iter().zip(parts) {
                    f.model().validate(p)?;
                }
                Ok(())
            }
            other => Err(Error::InvalidCoords(format!("expected product coords, got {other:?}"))),
        }
    }

    fn distance(&self, a: &Coords, b: &Coords) -> f64 {
        let (pa, pb) = (self.parts(a), self.parts(b));
        self.factors
            .iter()
            .zip(pa.iter().zip(pb))
            .map(|(f, (x, y))| {
                let d = f.model().distance(x, y);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    fn interpolate(&self, a: &Coords, b: &Coords, t: f64) -> Coords {
        let (pa, pb) = (self.parts(a), self.parts(b));
        Coords::Product(
            self.factors
                .iter()
                .zip(pa.iter().zip(pb))
                .map(|(f, (x, y))| f.model().interpolate(x, y, t))
                .collect(),
        )
    }

    fn base_point(&self) -> Coords {
        Coords::Product(self.factors.iter().map(|f| f.model().base_point()).collect())
    }

    fn sample_near(&self, anchor: &Coords, radius: f64, rng: &mut ChaCha8Rng) -> Coords {
        let pa = self.parts(anchor);
        Coords::Product(
            self.factors
                .iter()
                .zip(pa)
                .map(|(f, x)| f.model().sample_near(x, radius, rng))
                .collect(),
        )
    }

    fn coords_text(&self, c: &Coords) -> String {
        let body: String = self
            .factors
            .iter()
            .zip(self.parts(c))
            .map(|(f, p)| f.model().coords_text(p))
            .collect();
        format!("({body})")
    }

    fn coords_from_node(&self, node: &CoordNode) -> Result<Coords> {
        match node {
            CoordNode::Branch(children) if children.len() == self.factors.len() => {
                let mut parts = Vec::with_capacity(children.len());
                for (f, ch) in self.factors.iter().zip(children) {
                    parts.push(f.model().coords_from_node(ch)?);
                }
                Ok(Coords::Product(parts))
            }
            other => Err(Error::InvalidCoords(format!(
                "product coordinates must be {} nested groups, got {other:?}",
                self.factors.len()
            ))),
        }
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{distance, geodesic_point, GeodesicSegment};

    fn line_x_spider() -> Space {
        Space::from_descriptor("kind=product,factors=[kind=euclidean,dim=1;kind=spider,legs=3]").unwrap()
    }

    #[test]
    fn distance_is_root_sum_of_squares() {
        let s = line_x_spider();
        let a = s.parse_point("((0)(1 0))").unwrap();
        let b = s.parse_point("((3)(2 4))").unwrap();
        assert_eq!(distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn geodesics_are_componentwise() {
        let s = line_x_spider();
        let a = s.parse_point("((0)(1 2))").unwrap();
        let b = s.parse_point("((1)(2 3))").unwrap();
        let g = GeodesicSegment::new(a.clone(), b.clone()).unwrap();
        let p = geodesic_point(&g, 0.6).unwrap();
        match p.coords() {
            Coords::Product(parts) => {
                assert_eq!(parts[0], Coords::Euclidean(vec![0.6]));
                assert_eq!(parts[1], Coords::Spider { leg: 2, r: 1.0 });
            }
            _ => unreachable!(),
        }
        let d = distance(&a, &b).unwrap();
        let da = distance(&a, &p).unwrap();
        assert!((da - 0.6 * d).abs() < 1e-12);
    }

    #[test]
    fn needs_two_factors() {
        assert!(Space::from_descriptor("kind=product,factors=[kind=euclidean,dim=1]").is_err());
    }

    #[test]
    fn descriptor_round_trips() {
        let s = line_x_spider();
        let again = Space::from_descriptor(&s.descriptor()).unwrap();
        assert!(s.same_as(&again));
    }
}
