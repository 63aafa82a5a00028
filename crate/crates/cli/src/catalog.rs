//! Built-in methods, spaces, generators and example configs.

use serde::Serialize;

use crate::config::{BUILTIN_METHODS, BUILTIN_SPACES};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExampleConfig {
    pub name: &'static str,
    pub description: &'static str,
    #[serde(skip)]
    pub json: &'static str,
}

macro_rules! example {
    ($name:literal, $desc:literal) => {
        ExampleConfig {
            name: $name,
            description: $desc,
            json: include_str!(concat!("../configs/", $name, ".json")),
        }
    };
}

pub const EXAMPLES: [ExampleConfig; 8] = [
    example!("cesaro-regularity", "matrix regularity conditions for Cesàro means"),
    example!("matrix-regularity", "identity (regular) and series summation (unbounded row sums)"),
    example!("log-kernel-regularity", "kernel regularity of the logarithmic kernel and its 2x multiple"),
    example!("abel-regularity", "Abel limits of 20 random convergent sequences in C^4"),
    example!("cesaro-vs-abel", "Cesàro in Abel on Grandi's series; witness against the reverse"),
    example!("truncation-transfer", "inclusion transfer along coordinate truncations of C^4"),
    example!("taylor-h2", "partial sums, Abel dilates and log means of a Taylor series in H2"),
    example!("weak-inclusion", "functional-wise inclusion of Cesàro in Abel"),
];

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub name: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Catalog {
    pub methods: Vec<Entry>,
    pub spaces: Vec<Entry>,
    pub generators: Vec<Entry>,
    pub chain_steps: Vec<Entry>,
    pub experiment_kinds: Vec<Entry>,
    pub configs: Vec<ExampleConfig>,
}

pub fn example(name: &str) -> Option<&'static ExampleConfig> {
    EXAMPLES.iter().find(|e| e.name == name)
}

pub fn list_builtins() -> Catalog {
    let e = |name, description| Entry { name, description };
    let space_desc = ["ℓ² norm of the Taylor coefficients", "ℓ¹ norm of the Taylor coefficients", "max modulus on a boundary grid (default 4096 points)"];
    Catalog {
        methods: BUILTIN_METHODS.iter().map(|(n, d)| e(*n, *d)).collect(),
        spaces: BUILTIN_SPACES.iter().zip(space_desc).map(|(n, d)| e(*n, d)).collect(),
        generators: vec![
            e("polynomial", "explicit coefficient list"),
            e("geometric", "a_k = c ρ^k"),
            e("power", "a_k = c (k+1)^(−α)"),
            e("monomial", "z^k"),
            e("coefficients", "expression in k with a declared decay class"),
        ],
        chain_steps: vec![
            e("partial_sums", "S_n, n = 2^k"),
            e("abel_dilate", "A_r, r = 1 − 2^(−k)"),
            e("log_mean", "L_r, r = 1 − 2^(−k)"),
        ],
        experiment_kinds: vec![
            e("check_regularity", "Silverman-Toeplitz conditions (matrix or kernel form)"),
            e("sum", "summability limits of one or more sources"),
            e("inclusion", "A ⊆ B consistency on test inputs"),
            e("transfer", "inclusion transfer along an operator family"),
            e("weak_inclusion", "inclusion through linear functionals"),
            e("taylor", "‖M(f) − f‖ for Taylor-series method chains"),
        ],
        configs: EXAMPLES.to_vec(),
    }
}

impl std::fmt::Display for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let section = |f: &mut std::fmt::Formatter<'_>, title: &str, items: &[Entry]| -> std::fmt::Result {
            writeln!(f, "{title}:")?;
            for i in items {
                writeln!(f, "  {:<20} {}", i.name, i.description)?;
            }
            Ok(())
        };
        section(f, "methods", &self.methods)?;
        section(f, "spaces", &self.spaces)?;
        section(f, "generators", &self.generators)?;
        section(f, "chain steps", &self.chain_steps)?;
        section(f, "experiment kinds", &self.experiment_kinds)?;
        writeln!(f, "example configs:")?;
        for c in &self.configs {
            writeln!(f, "  {:<24} {}", c.name, c.description)?;
        }
        Ok(())
    }
}
