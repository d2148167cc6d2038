use sisomap_core::data::dense::read_csv_file;
use sisomap_core::data::{IdxQuery, SwissRoll};
use sisomap_core::{load_idx, DMatrix, DataMatrix};

use crate::config::{DatasetKind, DatasetSpec};
use crate::CliError;

pub struct Loaded {
    pub x: DataMatrix,
    pub truth: Option<DMatrix<f64>>,
}

pub fn swiss_roll(spec: &DatasetSpec, seed: u64) -> SwissRoll {
    SwissRoll::new(spec.n, seed).with_noise(spec.noise_sd)
}

pub fn load(spec: &DatasetSpec, seed: u64) -> Result<Loaded, CliError> {
    match spec.kind {
        DatasetKind::Swissroll => {
            let (x, truth) = swiss_roll(spec, seed).generate()?;
            Ok(Loaded { x, truth: Some(truth.coords) })
        }
        DatasetKind::Idx => {
            let path = spec.input.as_deref().expect("validated");
            let query = IdxQuery {
                labels: spec.labels.clone(),
                max_rows: spec.max_rows,
                label_filter: spec.label,
            };
            let (x, _) = load_idx(path, &query)?;
            Ok(Loaded { x, truth: None })
        }
        DatasetKind::Csv => {
            let mut x = read_csv_file(spec.input.as_deref().expect("validated"))?;
            if let Some(cap) = spec.max_rows.filter(|&c| c < x.rows()) {
                x = x.select_rows(&(0..cap).collect::<Vec<_>>())?;
            }
            let truth = match &spec.ground_truth {
                None => None,
                Some(p) => {
                    let t = read_csv_file(p)?;
                    if t.rows() < x.rows() {
                        return Err(CliError::Core(sisomap_core::Error::DimensionMismatch {
                            expected: x.rows(),
                            found: t.rows(),
                        }));
                    }
                    Some(DMatrix::from_fn(x.rows(), t.dim(), |r, c| t.row(r)[c]))
                }
            };
            Ok(Loaded { x, truth })
        }
    }
}
