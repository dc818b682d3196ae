//! Flat Euclidean space of a fixed dimension.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::descriptor::{fmt_f64, CoordNode, Descriptor};
use crate::error::{Error, Result};

use super::{Coords, ModelSpace, Space};

#[derive(Debug)]
pub struct Euclidean {
    dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Space> {
        if dim == 0 {
            return Err(Error::usage("euclidean space needs dim >= 1"));
        }
        Ok(Space::new(Euclidean { dim }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn vec<'a>(&self, c: &'a Coords) -> &'a [f64] {
        match c {
            Coords::Euclidean(v) => v,
            other => panic!("euclidean space got {other:?}"),
        }
    }
}

pub(super) fn build(d: &Descriptor) -> Result<Space> {
    d.expect_keys(&["kind", "dim"])?;
    Euclidean::new(d.usize("dim")?)
}

impl ModelSpace for Euclidean {
    fn kind(&self) -> &'static str {
        "euclidean"
    }

    fn descriptor(&self) -> String {
        format!("kind=euclidean,dim={}", self.dim)
    }

    fn validate(&self, c: &Coords) -> Result<()> {
        match c {
            Coords::Euclidean(v) if v.len() == self.dim && v.iter().all(|x| x.is_finite()) => Ok(()),
            Coords::Euclidean(v) => Err(Error::InvalidCoords(format!(
                "expected {} finite coordinates, got {:?}",
                self.dim, v
            ))),
            other => Err(Error::InvalidCoords(format!("expected euclidean coords, got {other:?}"))),
        }
    }

    fn distance(&self, a: &Coords, b: &Coords) -> f64 {
        let (a, b) = (self.vec(a), self.vec(b));
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    fn interpolate(&self, a: &Coords, b: &Coords, t: f64) -> Coords {
        let (a, b) = (self.vec(a), self.vec(b));
        Coords::Euclidean(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
    }

    fn base_point(&self) -> Coords {
        Coords::Euclidean(vec![0.0; self.dim])
    }

    fn sample_near(&self, anchor: &Coords, radius: f64, rng: &mut ChaCha8Rng) -> Coords {
        let a = self.vec(anchor);
        Coords::Euclidean(a.iter().map(|x| x + rng.gen_range(-radius..=radius)).collect())
    }

    fn coords_text(&self, c: &Coords) -> String {
        let body: Vec<String> = self.vec(c).iter().map(|v| fmt_f64(*v)).collect();
        format!("({})", body.join(" "))
    }

    fn coords_from_node(&self, node: &CoordNode) -> Result<Coords> {
        match node {
            CoordNode::Leaf(nums) => {
                let c = Coords::Euclidean(nums.clone());
                self.validate(&c)?;
                Ok(c)
            }
            CoordNode::Branch(_) => Err(Error::InvalidCoords(
                "euclidean coordinates must be a flat list".into(),
            )),
        }
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }

    fn segment_nearest(&self, a: &Coords, b: &Coords, x: &Coords) -> (f64, f64) {
        let (av, bv, xv) = (self.vec(a), self.vec(b), self.vec(x));
        let mut dot = 0.0;
        let mut nn = 0.0;
        for i in 0..self.dim {
            let d = bv[i] - av[i];
            dot += (xv[i] - av[i]) * d;
            nn += d * d;
        }
        if nn == 0.0 {
            return (0.0, self.distance(a, x));
        }
        let t = (dot / nn).clamp(0.0, 1.0);
        let p = self.interpolate(a, b, t);
        (t, self.distance(x, &p))
    }
}
