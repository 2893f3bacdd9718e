//! Built-in distributions with their known invariants.

use crate::point::Point;
use crate::reduction::{ClassKind, Distribution};
use crate::scalarfield::{parse, ScalarField};

/// A built-in distribution together with the values it is expected to
/// reproduce.
#[derive(Debug, Clone, Copy)]
pub struct Builtin {
    pub name: &'static str,
    pub description: &'static str,
    pub x1: [&'static str; 3],
    pub x2: [&'static str; 3],
    pub expected_class: ClassKind,
    /// Reference |c³₁₂| in the normalization where η³ is the standard contact
    /// form. With e3 = [e1, e2] the computed coefficient is always −1, so
    /// only the acceptance gate consults this.
    pub torsion_magnitude: Option<f64>,
    /// Closed form of M in the parse grammar.
    pub invariant: Option<&'static str>,
}

impl Builtin {
    pub fn distribution(&self) -> Distribution {
        Distribution::parse(self.name, self.x1, self.x2).expect("builtin expressions parse")
    }

    pub fn invariant_field(&self) -> Option<ScalarField> {
        self.invariant.map(|s| parse(s).expect("builtin invariant parses"))
    }
}

pub const BUILTINS: [Builtin; 3] = [
    Builtin {
        name: "heisenberg",
        description: "span{d/dx - y d/dz, d/dy + x d/dz}",
        x1: ["1", "0", "-y"],
        x2: ["0", "1", "x"],
        expected_class: ClassKind::Contact,
        torsion_magnitude: Some(2.0),
        invariant: Some("9/4*(x^2+y^2)^2/(1+x^2+y^2)^4"),
    },
    Builtin {
        name: "cartan",
        description: "span{d/dx - y d/dz, d/dy}",
        x1: ["1", "0", "-y"],
        x2: ["0", "1", "0"],
        expected_class: ClassKind::Contact,
        torsion_magnitude: Some(1.0),
        invariant: Some("1/4*(2*y^2-1)^2/(1+y^2)^4"),
    },
    Builtin {
        name: "exercise1a",
        description: "span{d/dx + y d/dz, d/dy + x d/dz} (integrable)",
        x1: ["1", "0", "x2"],
        x2: ["0", "1", "x1"],
        expected_class: ClassKind::Holonomic,
        torsion_magnitude: None,
        invariant: None,
    },
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

pub fn heisenberg() -> Distribution {
    BUILTINS[0].distribution()
}

pub fn cartan() -> Distribution {
    BUILTINS[1].distribution()
}

pub fn exercise1a() -> Distribution {
    BUILTINS[2].distribution()
}

/// x, y ∈ {−1, −0.5, 0, 0.5, 1}, z = 0.3, row-major in (x, y).
pub fn default_grid() -> Vec<Point> {
    let axis = [-1.0, -0.5, 0.0, 0.5, 1.0];
    axis.iter()
        .flat_map(|&x| axis.iter().map(move |&y| Point::new(x, y, 0.3)))
        .collect()
}
