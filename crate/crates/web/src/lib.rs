//! WebAssembly bindings behind `www/index.html`.
//!
//! The `demo` functions hold the logic and run natively; the exported wrappers
//! only convert errors for JavaScript.

use wasm_bindgen::prelude::*;

pub mod demo {
    use sstml::encoder::StmlEncoder;
    use sstml::evaluation::{
        compute_metrics, gaussian_smooth_partial, CdsMethod, HoeffdingMethod, StreamMethod,
    };
    use sstml::baselines::{EnsembleConfig, HoeffdingConfig};
    use sstml::streams::{DriftType, StreamConfig, SyntheticStream};
    use sstml::Result;

    #[derive(Debug, Clone, PartialEq)]
    pub struct Encoded {
        pub side: usize,
        pub pixels: Vec<u8>,
        pub chars_per_cell: usize,
        pub grid_rows: usize,
        pub grid_cols: usize,
    }

    pub fn encode(values: &[f64], side: usize) -> Result<Encoded> {
        let enc = StmlEncoder::new(values.len(), side)?;
        let img = enc.encode_instance(values)?;
        Ok(Encoded {
            side,
            pixels: img.pixels,
            chars_per_cell: enc.plan.chars_per_cell,
            grid_rows: enc.plan.grid_rows,
            grid_cols: enc.plan.grid_cols,
        })
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct Mixture {
        pub n_chunks: usize,
        pub n_concepts: usize,
        /// Row-major `n_chunks × n_concepts`.
        pub weights: Vec<f64>,
    }

    pub fn mixture(n_chunks: usize, n_drifts: usize, drift: &str, recurring: bool, seed: u64) -> Result<Mixture> {
        let drift_type: DriftType = drift.parse()?;
        let stream = SyntheticStream::new(StreamConfig {
            n_chunks,
            chunk_size: 20,
            n_features: 2,
            n_drifts,
            drift_type,
            recurring,
            recurring_concepts: 3,
            seed,
            ..StreamConfig::default()
        })?;
        let n_concepts = stream.schedule.concepts.len();
        let weights = (0..n_chunks).flat_map(|k| stream.schedule.weights(k)).collect();
        Ok(Mixture {
            n_chunks,
            n_concepts,
            weights,
        })
    }

    #[derive(Debug, Clone, PartialEq)]
    pub struct Race {
        pub chunk_index: Vec<f64>,
        /// Smoothed BAC; NaN where undefined.
        pub hoeffding: Vec<f64>,
        pub cds: Vec<f64>,
    }

    #[allow(clippy::too_many_arguments)]
    pub fn race(
        n_chunks: usize,
        chunk_size: usize,
        minority_fraction: f64,
        n_drifts: usize,
        drift: &str,
        seed: u64,
        sigma: f64,
    ) -> Result<Race> {
        let stream = SyntheticStream::new(StreamConfig {
            n_chunks,
            chunk_size,
            n_features: 4,
            minority_fraction,
            n_drifts,
            drift_type: drift.parse()?,
            seed,
            ..StreamConfig::default()
        })?;
        let chunks = stream.collect()?;
        let mut methods: [Box<dyn StreamMethod>; 2] = [
            Box::new(HoeffdingMethod::new(HoeffdingConfig::default())?),
            Box::new(CdsMethod::new(EnsembleConfig::default(), seed)?),
        ];
        let mut curves = [Vec::new(), Vec::new()];
        for (m, curve) in methods.iter_mut().zip(curves.iter_mut()) {
            m.learn(&chunks[0])?;
            for c in &chunks[1..] {
                let (pred, _) = m.predict(c.chunk_index, c.features.view())?;
                curve.push(compute_metrics(&c.labels, &pred)?.bac);
                m.learn(c)?;
            }
        }
        let smooth = |s: &[Option<f64>]| -> Result<Vec<f64>> {
            Ok(gaussian_smooth_partial(s, sigma)?
                .into_iter()
                .map(|v| v.unwrap_or(f64::NAN))
                .collect())
        };
        Ok(Race {
            chunk_index: chunks[1..].iter().map(|c| c.chunk_index as f64).collect(),
            hoeffding: smooth(&curves[0])?,
            cds: smooth(&curves[1])?,
        })
    }
}

fn js(e: sstml::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct EncodedImage(demo::Encoded);

#[wasm_bindgen]
impl EncodedImage {
    #[wasm_bindgen(getter)]
    pub fn side(&self) -> usize {
        self.0.side
    }

    /// Row-major grayscale pixels, 0 or 255.
    #[wasm_bindgen(getter)]
    pub fn pixels(&self) -> Vec<u8> {
        self.0.pixels.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn chars_per_cell(&self) -> usize {
        self.0.chars_per_cell
    }

    #[wasm_bindgen(getter)]
    pub fn grid_rows(&self) -> usize {
        self.0.grid_rows
    }

    #[wasm_bindgen(getter)]
    pub fn grid_cols(&self) -> usize {
        self.0.grid_cols
    }
}

#[wasm_bindgen]
pub fn encode_values(values: Vec<f64>, side: usize) -> Result<EncodedImage, JsError> {
    demo::encode(&values, side).map(EncodedImage).map_err(js)
}

#[wasm_bindgen]
pub struct DriftMixture(demo::Mixture);

#[wasm_bindgen]
impl DriftMixture {
    #[wasm_bindgen(getter)]
    pub fn n_chunks(&self) -> usize {
        self.0.n_chunks
    }

    #[wasm_bindgen(getter)]
    pub fn n_concepts(&self) -> usize {
        self.0.n_concepts
    }

    /// Row-major `n_chunks × n_concepts`.
    #[wasm_bindgen(getter)]
    pub fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }
}

#[wasm_bindgen]
pub fn drift_mixture(
    n_chunks: usize,
    n_drifts: usize,
    drift_type: &str,
    recurring: bool,
    seed: u64,
) -> Result<DriftMixture, JsError> {
    demo::mixture(n_chunks, n_drifts, drift_type, recurring, seed)
        .map(DriftMixture)
        .map_err(js)
}

#[wasm_bindgen]
pub struct BaselineRace(demo::Race);

#[wasm_bindgen]
impl BaselineRace {
    #[wasm_bindgen(getter)]
    pub fn chunk_index(&self) -> Vec<f64> {
        self.0.chunk_index.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn hoeffding(&self) -> Vec<f64> {
        self.0.hoeffding.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn cds(&self) -> Vec<f64> {
        self.0.cds.clone()
    }
}

#[wasm_bindgen]
pub fn baseline_race(
    n_chunks: usize,
    chunk_size: usize,
    minority_fraction: f64,
    n_drifts: usize,
    drift_type: &str,
    seed: u64,
    sigma: f64,
) -> Result<BaselineRace, JsError> {
    demo::race(n_chunks, chunk_size, minority_fraction, n_drifts, drift_type, seed, sigma)
        .map(BaselineRace)
        .map_err(js)
}
