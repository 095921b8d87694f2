use layout_model::nn::{GradStore, ParamStore};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

/// Which update rule the loop applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

/// Adam with bias correction; `Sgd` degenerates to a plain gradient step.
#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, params: &ParamStore) -> Self {
        let shapes: Vec<Array2<f64>> =
            params.iter().map(|(_, _, v)| Array2::zeros(v.raw_dim())).collect();
        Self { kind, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: shapes.clone(), v: shapes }
    }

    pub fn step(&mut self, params: &mut ParamStore, grads: &GradStore, lr: f64) {
        self.t += 1;
        match self.kind {
            OptimizerKind::Sgd => {
                for (id, g) in grads.iter() {
                    let p = params.value_mut(id);
                    *p -= &(g * lr);
                }
            }
            OptimizerKind::Adam => {
                let bc1 = 1.0 - self.beta1.powi(self.t as i32);
                let bc2 = 1.0 - self.beta2.powi(self.t as i32);
                for (id, g) in grads.iter() {
                    let i = id_index(id);
                    self.m[i] = &self.m[i] * self.beta1 + &(g * (1.0 - self.beta1));
                    self.v[i] = &self.v[i] * self.beta2 + &(g.mapv(|x| x * x) * (1.0 - self.beta2));
                    let m_hat = &self.m[i] / bc1;
                    let v_hat = &self.v[i] / bc2;
                    let update = m_hat / (v_hat.mapv(f64::sqrt) + self.eps) * lr;
                    let p = params.value_mut(id);
                    *p -= &update;
                }
            }
        }
    }

    /// Serialize moments for exact training resume.
    pub fn state_json(&self, params: &ParamStore) -> serde_json::Value {
        let dump = |tensors: &[Array2<f64>]| -> Vec<serde_json::Value> {
            params
                .iter()
                .map(|(id, name, _)| {
                    serde_json::json!({
                        "name": name,
                        "data": tensors[id_index(id)].iter().copied().collect::<Vec<f64>>(),
                    })
                })
                .collect()
        };
        serde_json::json!({
            "kind": self.kind,
            "t": self.t,
            "m": dump(&self.m),
            "v": dump(&self.v),
        })
    }

    pub fn from_state_json(
        value: &serde_json::Value,
        params: &ParamStore,
    ) -> Result<Self, String> {
        let kind: OptimizerKind =
            serde_json::from_value(value["kind"].clone()).map_err(|e| e.to_string())?;
        let mut opt = Self::new(kind, params);
        opt.t = value["t"].as_u64().ok_or("missing t")?;
        for (key, slot) in [("m", &mut opt.m), ("v", &mut opt.v)] {
            let entries = value[key].as_array().ok_or("missing moments")?;
            for entry in entries {
                let name = entry["name"].as_str().ok_or("moment without name")?;
                let data: Vec<f64> =
                    serde_json::from_value(entry["data"].clone()).map_err(|e| e.to_string())?;
                let (id, _, v) = params
                    .iter()
                    .find(|(_, n, _)| *n == name)
                    .ok_or_else(|| format!("unknown parameter {name}"))?;
                if data.len() != v.len() {
                    return Err(format!("moment size mismatch for {name}"));
                }
                slot[id_index(id)] =
                    Array2::from_shape_vec(v.raw_dim(), data).map_err(|e| e.to_string())?;
            }
        }
        Ok(opt)
    }
}

fn id_index(id: layout_model::nn::ParamId) -> usize {
    id.index()
}
