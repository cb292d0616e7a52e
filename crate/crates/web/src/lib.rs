//! WebAssembly bindings for the interactive page in `www/`.
//!
//! Structured results cross the boundary as JSON strings; flat numeric
//! arrays as typed arrays.

pub mod demo;

use wasm_bindgen::prelude::*;

use crate::demo::{Demo, Params};

fn js_err(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = decayCurve)]
pub fn decay_curve(decay: f64, steps: usize) -> Result<Vec<f64>, JsError> {
    demo::decay_curve(decay, steps).map_err(js_err)
}

#[wasm_bindgen]
pub struct Playground {
    inner: Demo,
}

#[wasm_bindgen]
impl Playground {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64) -> Playground {
        Playground {
            inner: Demo::new(seed),
        }
    }

    #[wasm_bindgen(js_name = nodeCount)]
    pub fn node_count(&self) -> usize {
        self.inner.graph().node_count()
    }

    /// `[x0, y0, x1, y1, ...]` in the unit square.
    pub fn positions(&self) -> Vec<f64> {
        self.inner.positions().iter().flatten().copied().collect()
    }

    /// `[a0, b0, a1, b1, ...]`.
    pub fn edges(&self) -> Vec<u32> {
        self.inner
            .edges()
            .iter()
            .flat_map(|&(a, b, _)| [a, b])
            .collect()
    }

    /// JSON array of `{name, role}` per node.
    pub fn nodes(&self) -> String {
        let g = self.inner.graph();
        let v: Vec<serde_json::Value> = g
            .keys()
            .iter()
            .zip(self.inner.roles())
            .map(|(k, r)| serde_json::json!({ "name": k.to_string(), "role": r }))
            .collect();
        serde_json::to_string(&v).expect("serializable")
    }

    /// JSON array of submission ids.
    pub fn submissions(&self) -> String {
        serde_json::to_string(&self.inner.submission_ids()).expect("serializable")
    }

    /// JSON `RankView` for one submission.
    pub fn rank(
        &self,
        submission: usize,
        decay: f64,
        steps: usize,
        expectation: bool,
        blackout_steps: usize,
    ) -> Result<String, JsError> {
        let params = Params {
            decay,
            steps,
            expectation,
            blackout_steps,
        };
        let view = self.inner.rank(submission, params).map_err(js_err)?;
        Ok(serde_json::to_string(&view).expect("serializable"))
    }

    /// JSON `EvalView` over all submissions and bids.
    pub fn evaluate(
        &self,
        decay: f64,
        steps: usize,
        expectation: bool,
        blackout_steps: usize,
    ) -> Result<String, JsError> {
        let params = Params {
            decay,
            steps,
            expectation,
            blackout_steps,
        };
        let view = self.inner.evaluate(params).map_err(js_err)?;
        Ok(serde_json::to_string(&view).expect("serializable"))
    }
}
