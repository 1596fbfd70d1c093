//! Embedding models and their scoring functions.
//!
//! Three model families share one parameter store:
//!
//! * translation (`TransE`): `score = -||s + r - o||_p`;
//! * rotation (`RotatE`): entities are complex vectors, relations are phase
//!   vectors applied as unit-modulus rotations,
//!   `score = -sum_i |s_i * r_i - o_i|`;
//! * relation-scaled distance (`MuRE`): a diagonal relation matrix and a
//!   translation, `score = -||R*s - (o + r)||^2 + b_s + b_o` with per-entity
//!   scalar biases.
//!
//! Parameters are `f64` in memory; the on-disk format stores little-endian
//! `f32` vectors with a JSON sidecar describing the layout.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use kghist_core::{EntityId, EntityKind, Object, Triple};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    RotatE,
    MuRE,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::RotatE => "rotate",
            ModelKind::MuRE => "mure",
        }
    }

    fn tag(self) -> u8 {
        match self {
            ModelKind::TransE => 0,
            ModelKind::RotatE => 1,
            ModelKind::MuRE => 2,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(ModelKind::TransE),
            1 => Some(ModelKind::RotatE),
            2 => Some(ModelKind::MuRE),
            _ => None,
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "transe" => Ok(ModelKind::TransE),
            "rotate" => Ok(ModelKind::RotatE),
            "mure" => Ok(ModelKind::MuRE),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("entity {id} is not embedded")]
    UnknownEntity { id: EntityId },
    #[error("relation {id} is not embedded")]
    UnknownRelation { id: EntityId },
    #[error("triple object is not an entity: {object}")]
    NonEntityObject { object: Object },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file is corrupt: {reason}")]
    Corrupt { reason: String },
    #[error("model sidecar is not valid JSON: {0}")]
    Sidecar(#[from] serde_json::Error),
}

/// Entity and relation vectors for one model kind.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub kind: ModelKind,
    pub dim: usize,
    pub norm: Norm,
    entities: Vec<EntityId>,
    relations: Vec<EntityId>,
    entity_index: BTreeMap<EntityId, usize>,
    relation_index: BTreeMap<EntityId, usize>,
    pub(crate) entity_vecs: Vec<f64>,
    pub(crate) relation_vecs: Vec<f64>,
    /// Per-entity scalar bias (relation-scaled distance model only).
    pub(crate) entity_bias: Vec<f64>,
}

impl EmbeddingModel {
    /// Per-entity parameter count.
    pub fn entity_width(&self) -> usize {
        match self.kind {
            ModelKind::TransE | ModelKind::MuRE => self.dim,
            // Complex vectors: interleaved (re, im) pairs.
            ModelKind::RotatE => 2 * self.dim,
        }
    }

    /// Per-relation parameter count.
    pub fn relation_width(&self) -> usize {
        match self.kind {
            ModelKind::TransE => self.dim,
            // Phase angles; the rotation itself always has unit modulus.
            ModelKind::RotatE => self.dim,
            // Diagonal scale followed by translation.
            ModelKind::MuRE => 2 * self.dim,
        }
    }

    /// Fresh model with seeded uniform initialization in `[-6/sqrt(d), 6/sqrt(d)]`
    /// (phases uniform in `[0, 2*pi)`).
    pub fn init(
        kind: ModelKind,
        dim: usize,
        norm: Norm,
        entities: Vec<EntityId>,
        relations: Vec<EntityId>,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let mut model = EmbeddingModel {
            kind,
            dim,
            norm,
            entity_index: entities.iter().copied().zip(0..).collect(),
            relation_index: relations.iter().copied().zip(0..).collect(),
            entities,
            relations,
            entity_vecs: Vec::new(),
            relation_vecs: Vec::new(),
            entity_bias: Vec::new(),
        };
        let bound = 6.0 / (dim as f64).sqrt();
        let entity_len = model.entities.len() * model.entity_width();
        model.entity_vecs = (0..entity_len).map(|_| rng.random_range(-bound..bound)).collect();
        let relation_len = model.relations.len() * model.relation_width();
        model.relation_vecs = match kind {
            ModelKind::RotatE => (0..relation_len)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect(),
            _ => (0..relation_len).map(|_| rng.random_range(-bound..bound)).collect(),
        };
        if kind == ModelKind::MuRE {
            model.entity_bias = vec![0.0; model.entities.len()];
            // Identity-like scale keeps early scores finite and informative.
            for r in 0..model.relations.len() {
                for i in 0..dim {
                    model.relation_vecs[r * 2 * dim + i] = 1.0 + rng.random_range(-0.1..0.1);
                }
            }
        }
        model
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn relations(&self) -> &[EntityId] {
        &self.relations
    }

    pub fn entity_id_index(&self, id: EntityId) -> Result<usize, ModelError> {
        self.entity_index.get(&id).copied().ok_or(ModelError::UnknownEntity { id })
    }

    pub fn relation_id_index(&self, id: EntityId) -> Result<usize, ModelError> {
        self.relation_index.get(&id).copied().ok_or(ModelError::UnknownRelation { id })
    }

    pub fn entity_vec(&self, index: usize) -> &[f64] {
        let w = self.entity_width();
        &self.entity_vecs[index * w..(index + 1) * w]
    }

    pub fn relation_vec(&self, index: usize) -> &[f64] {
        let w = self.relation_width();
        &self.relation_vecs[index * w..(index + 1) * w]
    }

    /// Raw parameter access, mainly for diagnostics and gradient probes.
    pub fn entity_vecs_mut(&mut self) -> &mut [f64] {
        &mut self.entity_vecs
    }

    pub fn relation_vecs_mut(&mut self) -> &mut [f64] {
        &mut self.relation_vecs
    }

    pub fn entity_bias_mut(&mut self) -> &mut [f64] {
        &mut self.entity_bias
    }

    /// Plausibility score of a triple; higher is more plausible.
    pub fn score(&self, triple: &Triple) -> Result<f64, ModelError> {
        let Object::Entity(object) = &triple.object else {
            return Err(ModelError::NonEntityObject { object: triple.object.clone() });
        };
        let s = self.entity_id_index(triple.subject)?;
        let r = self.relation_id_index(triple.predicate)?;
        let o = self.entity_id_index(*object)?;
        Ok(self.score_indexed(s, r, o))
    }

    pub fn score_indexed(&self, s: usize, r: usize, o: usize) -> f64 {
        match self.kind {
            ModelKind::TransE => self.score_translation(s, r, o),
            ModelKind::RotatE => self.score_rotation(s, r, o),
            ModelKind::MuRE => self.score_scaled_distance(s, r, o),
        }
    }

    fn score_translation(&self, s: usize, r: usize, o: usize) -> f64 {
        let sv = self.entity_vec(s);
        let rv = self.relation_vec(r);
        let ov = self.entity_vec(o);
        match self.norm {
            Norm::L1 => {
                -(0..self.dim).map(|i| (sv[i] + rv[i] - ov[i]).abs()).sum::<f64>()
            }
            Norm::L2 => {
                let sq: f64 = (0..self.dim).map(|i| (sv[i] + rv[i] - ov[i]).powi(2)).sum();
                -sq.sqrt()
            }
        }
    }

    fn score_rotation(&self, s: usize, r: usize, o: usize) -> f64 {
        let sv = self.entity_vec(s);
        let phases = self.relation_vec(r);
        let ov = self.entity_vec(o);
        let mut total = 0.0;
        for i in 0..self.dim {
            let (a, b) = (sv[2 * i], sv[2 * i + 1]);
            let (cos, sin) = (phases[i].cos(), phases[i].sin());
            let re = a * cos - b * sin - ov[2 * i];
            let im = a * sin + b * cos - ov[2 * i + 1];
            total += (re * re + im * im).sqrt().max(f64::MIN_POSITIVE);
        }
        -total
    }

    fn score_scaled_distance(&self, s: usize, r: usize, o: usize) -> f64 {
        let sv = self.entity_vec(s);
        let rv = self.relation_vec(r);
        let ov = self.entity_vec(o);
        let (scale, shift) = rv.split_at(self.dim);
        let sq: f64 =
            (0..self.dim).map(|i| (scale[i] * sv[i] - (ov[i] + shift[i])).powi(2)).sum();
        -sq + self.entity_bias[s] + self.entity_bias[o]
    }

    /// Score plus gradients with respect to the involved parameter blocks:
    /// `(score, d/d_subject, d/d_relation, d/d_object, d/d_bias_s, d/d_bias_o)`.
    pub fn score_and_grad(
        &self,
        s: usize,
        r: usize,
        o: usize,
    ) -> (f64, Vec<f64>, Vec<f64>, Vec<f64>, f64, f64) {
        match self.kind {
            ModelKind::TransE => {
                let sv = self.entity_vec(s);
                let rv = self.relation_vec(r);
                let ov = self.entity_vec(o);
                let diffs: Vec<f64> = (0..self.dim).map(|i| sv[i] + rv[i] - ov[i]).collect();
                match self.norm {
                    Norm::L1 => {
                        let score = -diffs.iter().map(|d| d.abs()).sum::<f64>();
                        let gs: Vec<f64> = diffs.iter().map(|d| -d.signum()).collect();
                        let go: Vec<f64> = diffs.iter().map(|d| d.signum()).collect();
                        (score, gs.clone(), gs, go, 0.0, 0.0)
                    }
                    Norm::L2 => {
                        let dist = diffs.iter().map(|d| d * d).sum::<f64>().sqrt();
                        let safe = dist.max(1e-12);
                        let gs: Vec<f64> = diffs.iter().map(|d| -d / safe).collect();
                        let go: Vec<f64> = diffs.iter().map(|d| d / safe).collect();
                        (-dist, gs.clone(), gs, go, 0.0, 0.0)
                    }
                }
            }
            ModelKind::RotatE => {
                let sv = self.entity_vec(s);
                let phases = self.relation_vec(r);
                let ov = self.entity_vec(o);
                let mut score = 0.0;
                let mut gs = vec![0.0; 2 * self.dim];
                let mut gr = vec![0.0; self.dim];
                let mut go = vec![0.0; 2 * self.dim];
                for i in 0..self.dim {
                    let (a, b) = (sv[2 * i], sv[2 * i + 1]);
                    let (cos, sin) = (phases[i].cos(), phases[i].sin());
                    let re = a * cos - b * sin - ov[2 * i];
                    let im = a * sin + b * cos - ov[2 * i + 1];
                    let modulus = (re * re + im * im).sqrt().max(1e-12);
                    score -= modulus;
                    // d(-|z|)/dre = -re/|z|, chain-ruled into each parameter.
                    let (dre, dim_) = (-re / modulus, -im / modulus);
                    gs[2 * i] = dre * cos + dim_ * sin;
                    gs[2 * i + 1] = -dre * sin + dim_ * cos;
                    gr[i] = dre * (-a * sin - b * cos) + dim_ * (a * cos - b * sin);
                    go[2 * i] = -dre;
                    go[2 * i + 1] = -dim_;
                }
                (score, gs, gr, go, 0.0, 0.0)
            }
            ModelKind::MuRE => {
                let sv = self.entity_vec(s);
                let rv = self.relation_vec(r);
                let ov = self.entity_vec(o);
                let (scale, shift) = rv.split_at(self.dim);
                let mut score = 0.0;
                let mut gs = vec![0.0; self.dim];
                let mut gr = vec![0.0; 2 * self.dim];
                let mut go = vec![0.0; self.dim];
                for i in 0..self.dim {
                    let d = scale[i] * sv[i] - (ov[i] + shift[i]);
                    score -= d * d;
                    gs[i] = -2.0 * d * scale[i];
                    gr[i] = -2.0 * d * sv[i];
                    gr[self.dim + i] = 2.0 * d;
                    go[i] = 2.0 * d;
                }
                score += self.entity_bias[s] + self.entity_bias[o];
                (score, gs, gr, go, 1.0, 1.0)
            }
        }
    }

    pub(crate) fn nudge_entity(&mut self, index: usize, grad: &[f64], step: f64) {
        let w = self.entity_width();
        for (slot, g) in self.entity_vecs[index * w..(index + 1) * w].iter_mut().zip(grad) {
            *slot += step * g;
        }
    }

    pub(crate) fn nudge_relation(&mut self, index: usize, grad: &[f64], step: f64) {
        let w = self.relation_width();
        for (slot, g) in self.relation_vecs[index * w..(index + 1) * w].iter_mut().zip(grad) {
            *slot += step * g;
        }
        if self.kind == ModelKind::RotatE {
            // Keep phases in [0, 2*pi); the rotation stays unit-modulus.
            for slot in self.relation_vecs[index * w..(index + 1) * w].iter_mut() {
                *slot = slot.rem_euclid(std::f64::consts::TAU);
            }
        }
    }

    pub(crate) fn nudge_bias(&mut self, index: usize, grad: f64, step: f64) {
        if !self.entity_bias.is_empty() {
            self.entity_bias[index] += step * grad;
        }
    }

    /// Modulus of one rotation component, which is 1 by construction.
    pub fn rotation_modulus(&self, relation: usize, component: usize) -> f64 {
        debug_assert_eq!(self.kind, ModelKind::RotatE);
        let phase = self.relation_vec(relation)[component];
        (phase.cos().powi(2) + phase.sin().powi(2)).sqrt()
    }

    pub fn has_nan(&self) -> bool {
        self.entity_vecs.iter().chain(&self.relation_vecs).chain(&self.entity_bias).any(|v| !v.is_finite())
    }

    // -- persistence ---------------------------------------------------------

    /// Writes `<stem>.bin` (binary vectors) and `<stem>.json` (layout sidecar).
    pub fn save(&self, stem: &Path) -> Result<(), ModelError> {
        let bin_path = stem.with_extension("bin");
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source: std::io::Error| ModelError::Io { path, source }
        };
        let mut out: Vec<u8> = Vec::new();
        out.extend_from_slice(b"KGHM");
        out.push(1); // format version
        out.push(self.kind.tag());
        out.push(match self.norm {
            Norm::L1 => 1,
            Norm::L2 => 2,
        });
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.entities.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.relations.len() as u32).to_le_bytes());
        for id in self.entities.iter().chain(&self.relations) {
            out.push(match id.kind {
                EntityKind::Item => b'Q',
                EntityKind::Property => b'P',
            });
            out.extend_from_slice(&id.number.to_le_bytes());
        }
        for value in self.entity_vecs.iter().chain(&self.relation_vecs).chain(&self.entity_bias) {
            out.extend_from_slice(&(*value as f32).to_le_bytes());
        }
        let mut file = std::fs::File::create(&bin_path).map_err(io(&bin_path))?;
        file.write_all(&out).map_err(io(&bin_path))?;

        let sidecar = ModelSidecar {
            kind: self.kind,
            norm: self.norm,
            dim: self.dim,
            entity_count: self.entities.len(),
            relation_count: self.relations.len(),
            entity_width: self.entity_width(),
            relation_width: self.relation_width(),
            has_entity_bias: !self.entity_bias.is_empty(),
        };
        let json_path = stem.with_extension("json");
        std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)?)
            .map_err(io(&json_path))?;
        Ok(())
    }

    pub fn load(stem: &Path) -> Result<Self, ModelError> {
        let bin_path = stem.with_extension("bin");
        let io = |source: std::io::Error| ModelError::Io { path: bin_path.clone(), source };
        let mut bytes = Vec::new();
        std::fs::File::open(&bin_path).map_err(io)?.read_to_end(&mut bytes).map_err(io)?;
        let corrupt = |reason: &str| ModelError::Corrupt { reason: reason.to_owned() };

        let mut cursor = 0usize;
        let mut take = |n: usize| -> Result<&[u8], ModelError> {
            if cursor + n > bytes.len() {
                return Err(corrupt("truncated file"));
            }
            let slice = &bytes[cursor..cursor + n];
            cursor += n;
            Ok(slice)
        };
        if take(4)? != b"KGHM" {
            return Err(corrupt("bad magic"));
        }
        if take(1)?[0] != 1 {
            return Err(corrupt("unsupported version"));
        }
        let kind = ModelKind::from_tag(take(1)?[0]).ok_or_else(|| corrupt("bad model kind"))?;
        let norm = match take(1)?[0] {
            1 => Norm::L1,
            2 => Norm::L2,
            _ => return Err(corrupt("bad norm")),
        };
        let dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let n_entities = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let n_relations = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;

        let mut read_ids = |count: usize| -> Result<Vec<EntityId>, ModelError> {
            let mut ids = Vec::with_capacity(count);
            for _ in 0..count {
                let tag = take(1)?[0];
                let number = u64::from_le_bytes(take(8)?.try_into().unwrap());
                let kind = match tag {
                    b'Q' => EntityKind::Item,
                    b'P' => EntityKind::Property,
                    _ => return Err(corrupt("bad id tag")),
                };
                ids.push(EntityId { kind, number });
            }
            Ok(ids)
        };
        let entities = read_ids(n_entities)?;
        let relations = read_ids(n_relations)?;

        let mut model = EmbeddingModel {
            kind,
            dim,
            norm,
            entity_index: entities.iter().copied().zip(0..).collect(),
            relation_index: relations.iter().copied().zip(0..).collect(),
            entities,
            relations,
            entity_vecs: Vec::new(),
            relation_vecs: Vec::new(),
            entity_bias: Vec::new(),
        };
        let mut read_floats = |count: usize| -> Result<Vec<f64>, ModelError> {
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                let raw = take(4)?;
                values.push(f32::from_le_bytes(raw.try_into().unwrap()) as f64);
            }
            Ok(values)
        };
        model.entity_vecs = read_floats(n_entities * model.entity_width())?;
        model.relation_vecs = read_floats(n_relations * model.relation_width())?;
        if kind == ModelKind::MuRE {
            model.entity_bias = read_floats(n_entities)?;
        }
        if cursor != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelSidecar {
    kind: ModelKind,
    norm: Norm,
    dim: usize,
    entity_count: usize,
    relation_count: usize,
    entity_width: usize,
    relation_width: usize,
    has_entity_bias: bool,
}
