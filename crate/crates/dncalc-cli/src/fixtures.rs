//! Golden data: the seventeen `(N, d)` rows — constants, matrices,
//! operators, solution recipes — stored as data so they can be diffed
//! against their published source independently of the code.

use serde::{Deserialize, Serialize};

use dncalc_core::modular;
use dncalc_core::numth::{rat_from_str, Rat};
use dncalc_core::series::RatSeries;

use crate::formats::{MatrixJson, OperatorJson};

pub const GOLDEN_JSON: &str = include_str!("../fixtures/golden.json");
pub const PIPELINE_RELATION_JSON: &str = include_str!("../fixtures/pipeline_relation.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolutionRecipe {
    /// Weight-one combination `sum e_j E_{2,j}`.
    Eisenstein { combo: Vec<(u32, String)> },
    /// `sqrt(E_4)`, the level-one solution.
    SqrtE4,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub pair: (u32, u32),
    pub c0: String,
    pub matrix: MatrixJson,
    pub operator: OperatorJson,
    pub solution: SolutionRecipe,
    /// The two eta indices `(d, N d)` in the product identity.
    pub eta_exponents: (u32, u32),
    pub provenance: String,
}

impl GoldenFixture {
    pub fn c0(&self) -> Rat {
        rat_from_str(&self.c0).expect("fixture c0 parses")
    }

    /// The solution series rebuilt from the fixture's own recipe (not from
    /// the library's built-in tables).
    pub fn solution_series(&self, prec: usize) -> RatSeries {
        match &self.solution {
            SolutionRecipe::SqrtE4 => {
                let base = modular::e4(prec).nth_root(2).expect("E4 has unit head");
                base.spread(self.pair.1 as usize).truncate(prec)
            }
            SolutionRecipe::Eisenstein { combo } => {
                let mut acc = RatSeries::zero(prec);
                for (j, e) in combo {
                    let coeff = rat_from_str(e).expect("fixture combo coefficient parses");
                    acc = acc.add(&modular::eisenstein_e2(*j, prec).scale(&coeff));
                }
                acc
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineRelation {
    pub relation: String,
    pub detail: String,
}

pub fn golden() -> Vec<GoldenFixture> {
    serde_json::from_str(GOLDEN_JSON).expect("golden.json parses")
}

pub fn pipeline_relation() -> PipelineRelation {
    serde_json::from_str(PIPELINE_RELATION_JSON).expect("pipeline_relation.json parses")
}
