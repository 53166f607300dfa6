//! Minibatch training with hand-derived gradients.
//!
//! Steps are straight-through in the backward pass: the gradient of
//! `bin_act(z)` is taken as 1 on `|z| <= 1` and 0 elsewhere. The BinMask head
//! uses the same estimator on both its sign and its mask.

use std::cell::RefCell;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::block::LttSpec;
use super::model::{HeadMode, TtnetModel};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub mask_weight_decay: f64,
    pub head_mode: HeadMode,
    pub dropout_p: f64,
    pub spec: LttSpec,
    pub filters: usize,
}

impl TrainConfig {
    pub fn new(spec: LttSpec, filters: usize) -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 128,
            learning_rate: 0.005,
            seed: 0,
            mask_weight_decay: 1e-7,
            head_mode: HeadMode::BinarySparse,
            dropout_p: 0.2,
            spec,
            filters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.epochs == 0 || self.batch_size == 0 || self.filters == 0 {
            return Err(Error::Config("epochs, batch size and filters must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_p) {
            return Err(Error::Config("dropout must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Gradients of the batch loss, one tensor per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub input_gamma: Vec<f64>,
    pub input_beta: Vec<f64>,
    pub blocks: Vec<BlockGradients>,
    pub final_gamma: Vec<f64>,
    pub final_beta: Vec<f64>,
    pub head_weights: Vec<f64>,
    pub head_mask: Vec<f64>,
    pub head_bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockGradients {
    pub w1: Vec<f64>,
    pub bn_gamma: Vec<f64>,
    pub bn_beta: Vec<f64>,
    pub w2: Vec<f64>,
}

/// Batch statistics observed during a training forward pass, used for the
/// running-average update.
struct BatchStats {
    input: (Vec<f64>, Vec<f64>),
    inner: Vec<Option<(Vec<f64>, Vec<f64>)>>,
    fin: (Vec<f64>, Vec<f64>),
}

#[inline]
fn ste(z: f64) -> f64 {
    if z.abs() <= 1.0 {
        1.0
    } else {
        0.0
    }
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Per-channel batch mean and biased variance of `n` samples.
fn moments(sum: f64, sumsq_centered: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    (sum / nf, sumsq_centered / nf)
}

fn unbiased(var: &[f64], n: usize) -> Vec<f64> {
    if n > 1 {
        var.iter().map(|v| v * n as f64 / (n - 1) as f64).collect()
    } else {
        var.to_vec()
    }
}

thread_local! {
    static POOL: RefCell<Vec<Vec<f64>>> = const { RefCell::new(Vec::new()) };
}

/// A zeroed buffer, reusing a recycled allocation when one is free.
fn zeros(n: usize) -> Vec<f64> {
    let mut v = POOL.with(|p| p.borrow_mut().pop()).unwrap_or_default();
    v.clear();
    v.resize(n, 0.0);
    v
}

fn recycle(v: Vec<f64>) {
    POOL.with(|p| {
        let mut p = p.borrow_mut();
        if p.len() < 32 {
            p.push(v);
        }
    });
}

/// Training-mode forward and backward pass over one batch. Returns the mean
/// loss, parameter gradients and the batch statistics.
fn forward_backward(
    model: &TtnetModel,
    ds: &Dataset,
    batch: &[usize],
    weight_decay: f64,
    dropout: Option<&mut ChaCha8Rng>,
) -> (f64, Gradients, BatchStats) {
    let bsz = batch.len();
    let bf = bsz as f64;
    let l = model.num_features();
    let f_count = model.num_filters();
    let p_count = model.num_patches();
    let LttSpec {
        n: _,
        stride,
        amplification: a,
        k1,
        k2: t_count,
        ..
    } = model.spec;
    let slots = f_count * p_count;
    let c = model.num_outputs();

    // Input batch-norm and step.
    let bn = &model.input_bn;
    let mut in_mean = vec![0.0; l];
    for &r in batch {
        for (m, x) in in_mean.iter_mut().zip(ds.row(r)) {
            *m += x;
        }
    }
    let mut in_var = vec![0.0; l];
    for &r in batch {
        for (j, x) in ds.row(r).iter().enumerate() {
            let d = x - in_mean[j] / bf;
            in_var[j] += d * d;
        }
    }
    for j in 0..l {
        let (m, v) = moments(in_mean[j], in_var[j], bsz);
        in_mean[j] = m;
        in_var[j] = v;
    }
    let in_inv: Vec<f64> = in_var.iter().map(|v| 1.0 / (v + bn.eps).sqrt()).collect();
    let mut xhat = zeros(bsz * l);
    let mut u = zeros(bsz * l);
    let mut pass_in = zeros(bsz * l);
    for (bi, &r) in batch.iter().enumerate() {
        for (j, x) in ds.row(r).iter().enumerate() {
            let xh = (x - in_mean[j]) * in_inv[j];
            let z = bn.gamma[j] * xh + bn.beta[j];
            xhat[bi * l + j] = xh;
            u[bi * l + j] = if z > 0.0 { 1.0 } else { 0.0 };
            pass_in[bi * l + j] = ste(z);
        }
    }

    // LTT blocks. Layout of per-position tensors: [b][f][i][t][a].
    let pa = t_count * a;
    let prt = p_count * pa;
    let per_row = f_count * prt;
    let chunk = |bi: usize, f: usize| {
        let start = (bi * f_count + f) * prt;
        start..start + prt
    };
    let mut h = zeros(bsz * per_row);
    for bi in 0..bsz {
        let ub = &u[bi * l..(bi + 1) * l];
        for (f, blk) in model.blocks.iter().enumerate() {
            for (i, hp) in h[chunk(bi, f)].chunks_exact_mut(pa).enumerate() {
                for (t, ht) in hp.chunks_exact_mut(a).enumerate() {
                    let base = i * stride + t;
                    let inp = &ub[base..base + k1];
                    for (hv, w) in ht.iter_mut().zip(blk.w1.chunks_exact(k1)) {
                        *hv = w.iter().zip(inp).map(|(w, x)| w * x).sum::<f64>();
                    }
                }
            }
        }
    }
    let group_n = bsz * p_count * t_count;
    let mut inner_stats = Vec::with_capacity(f_count);
    let mut inner_inv = vec![vec![0.0; a]; f_count];
    let mut hhat = zeros(bsz * per_row);
    let mut g = zeros(bsz * per_row);
    for (f, blk) in model.blocks.iter().enumerate() {
        match &blk.inner_bn {
            None => {
                for bi in 0..bsz {
                    g[chunk(bi, f)].copy_from_slice(&h[chunk(bi, f)]);
                }
                inner_stats.push(None);
            }
            Some(ibn) => {
                let mut mean = vec![0.0; a];
                let mut var = vec![0.0; a];
                for bi in 0..bsz {
                    for hv in h[chunk(bi, f)].chunks_exact(a) {
                        mean.iter_mut().zip(hv).for_each(|(m, x)| *m += x);
                    }
                }
                mean.iter_mut().for_each(|m| *m /= group_n as f64);
                for bi in 0..bsz {
                    for hv in h[chunk(bi, f)].chunks_exact(a) {
                        for ((v, x), m) in var.iter_mut().zip(hv).zip(&mean) {
                            *v += (x - m) * (x - m);
                        }
                    }
                }
                var.iter_mut().for_each(|v| *v /= group_n as f64);
                for ch in 0..a {
                    inner_inv[f][ch] = 1.0 / (var[ch] + ibn.eps).sqrt();
                }
                let inv = &inner_inv[f];
                for bi in 0..bsz {
                    let r = chunk(bi, f);
                    let rows = hhat[r.clone()]
                        .chunks_exact_mut(a)
                        .zip(g[r.clone()].chunks_exact_mut(a))
                        .zip(h[r].chunks_exact(a));
                    for ((hh, gv), hv) in rows {
                        for ch in 0..a {
                            let x = (hv[ch] - mean[ch]) * inv[ch];
                            hh[ch] = x;
                            gv[ch] = ibn.gamma[ch] * x + ibn.beta[ch];
                        }
                    }
                }
                inner_stats.push(Some((mean, var)));
            }
        }
    }
    recycle(h);
    let mut o = zeros(bsz * slots);
    for bi in 0..bsz {
        for (f, blk) in model.blocks.iter().enumerate() {
            for (i, gp) in g[chunk(bi, f)].chunks_exact(pa).enumerate() {
                o[bi * slots + f * p_count + i] =
                    gp.iter().zip(&blk.w2).map(|(g, w)| w * g.max(0.0)).sum::<f64>();
            }
        }
    }

    // Final batch-norm over slots.
    let fbn = &model.final_bn;
    let mut y = zeros(bsz * slots);
    for (yv, &v) in y.iter_mut().zip(&o) {
        *yv = if v > 0.0 { 1.0 } else { 0.0 };
    }
    let mut fin_mean = vec![0.0; slots];
    let mut fin_var = vec![0.0; slots];
    for bi in 0..bsz {
        for k in 0..slots {
            fin_mean[k] += y[bi * slots + k];
        }
    }
    fin_mean.iter_mut().for_each(|m| *m /= bf);
    for bi in 0..bsz {
        for k in 0..slots {
            let d = y[bi * slots + k] - fin_mean[k];
            fin_var[k] += d * d;
        }
    }
    fin_var.iter_mut().for_each(|v| *v /= bf);
    let fin_inv: Vec<f64> = fin_var.iter().map(|v| 1.0 / (v + fbn.eps).sqrt()).collect();
    let mut yhat = zeros(bsz * slots);
    let mut q = zeros(bsz * slots);
    let mut keep = zeros(bsz * slots);
    keep.fill(1.0);
    if let Some(rng) = dropout {
        let p = model.dropout_p;
        if p > 0.0 {
            for kv in keep.iter_mut() {
                *kv = if rng.gen::<f64>() < p { 0.0 } else { 1.0 / (1.0 - p) };
            }
        }
    }
    for bi in 0..bsz {
        for k in 0..slots {
            let e = bi * slots + k;
            let yh = (y[e] - fin_mean[k]) * fin_inv[k];
            yhat[e] = yh;
            q[e] = (fbn.gamma[k] * yh + fbn.beta[k]) * keep[e];
        }
    }

    // Head and loss.
    let weff = model.head.effective_weights();
    let mut ds_out = zeros(bsz * c);
    let mut loss = 0.0;
    for (bi, &r) in batch.iter().enumerate() {
        let mut s = model.head.bias.clone();
        let qrow = &q[bi * slots..(bi + 1) * slots];
        for (k, qv) in qrow.iter().enumerate() {
            if *qv != 0.0 {
                for (cls, sv) in s.iter_mut().enumerate() {
                    *sv += qv * weff[k * c + cls];
                }
            }
        }
        let d = &mut ds_out[bi * c..(bi + 1) * c];
        match model.task {
            Task::Regression => {
                let e = s[0] - ds.target(r);
                loss += e * e;
                d[0] = 2.0 * e / bf;
            }
            _ => {
                let target = ds.class(r);
                let mx = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let z: f64 = s.iter().map(|v| (v - mx).exp()).sum();
                loss += -(s[target] - mx - z.ln());
                for cls in 0..c {
                    let pc = (s[cls] - mx).exp() / z;
                    d[cls] = (pc - if cls == target { 1.0 } else { 0.0 }) / bf;
                }
            }
        }
    }
    loss /= bf;

    // Backward: head.
    let mut d_weff = vec![0.0; slots * c];
    let mut d_bias = vec![0.0; c];
    let mut dq = zeros(bsz * slots);
    for bi in 0..bsz {
        let d = &ds_out[bi * c..(bi + 1) * c];
        for (cls, dv) in d.iter().enumerate() {
            d_bias[cls] += dv;
        }
        for k in 0..slots {
            let e = bi * slots + k;
            let qv = q[e];
            let mut acc = 0.0;
            for cls in 0..c {
                d_weff[k * c + cls] += qv * d[cls];
                acc += d[cls] * weff[k * c + cls];
            }
            dq[e] = acc * keep[e];
        }
    }
    let head = &model.head;
    let (head_weights, head_mask) = match head.mode {
        HeadMode::Float => (d_weff, Vec::new()),
        HeadMode::BinarySparse => {
            let mut dw = vec![0.0; slots * c];
            let mut dm = vec![0.0; slots * c];
            for e in 0..slots * c {
                // The sign latent keeps learning while gated off, so a
                // revived weight comes back with a useful sign.
                dw[e] = d_weff[e] * ste(head.weights[e]);
                dm[e] = d_weff[e] * sign(head.weights[e]) * ste(head.mask[e])
                    + weight_decay * head.mask[e];
            }
            (dw, dm)
        }
    };

    // Final batch-norm backward.
    let mut final_gamma = vec![0.0; slots];
    let mut final_beta = vec![0.0; slots];
    let mut sum_dyh = vec![0.0; slots];
    let mut sum_dyh_yh = vec![0.0; slots];
    for bi in 0..bsz {
        for k in 0..slots {
            let e = bi * slots + k;
            final_gamma[k] += dq[e] * yhat[e];
            final_beta[k] += dq[e];
            let dyh = dq[e] * fbn.gamma[k];
            sum_dyh[k] += dyh;
            sum_dyh_yh[k] += dyh * yhat[e];
        }
    }
    // Gradient at the block outputs, through the step.
    let mut d_o = zeros(bsz * slots);
    for bi in 0..bsz {
        for k in 0..slots {
            let e = bi * slots + k;
            let dyh = dq[e] * fbn.gamma[k];
            let dy = fin_inv[k] / bf * (bf * dyh - sum_dyh[k] - yhat[e] * sum_dyh_yh[k]);
            d_o[e] = dy * ste(o[e]);
        }
    }
    recycle(dq);

    // LTT blocks backward.
    let mut blocks = Vec::with_capacity(f_count);
    let mut du = zeros(bsz * l);
    let mut dg = zeros(bsz * per_row);
    for (f, blk) in model.blocks.iter().enumerate() {
        let mut dw2 = vec![0.0; t_count * a];
        for bi in 0..bsz {
            let start = chunk(bi, f).start;
            for i in 0..p_count {
                let dov = d_o[bi * slots + f * p_count + i];
                let r = start + i * pa..start + (i + 1) * pa;
                let dgp = &mut dg[r.clone()];
                if dov == 0.0 {
                    dgp.fill(0.0);
                    continue;
                }
                let cells = dgp.iter_mut().zip(&g[r]).zip(dw2.iter_mut().zip(&blk.w2));
                for ((d, &gv), (dw, w)) in cells {
                    if gv > 0.0 {
                        *dw += dov * gv;
                        *d = dov * w;
                    } else {
                        *d = 0.0;
                    }
                }
            }
        }
        let mut bn_gamma = vec![0.0; a];
        let mut bn_beta = vec![0.0; a];
        if let Some(ibn) = &blk.inner_bn {
            // dh = inv/N (N dhh - sum dhh - hh sum(dhh hh)) with dhh = dg * gamma.
            let mut s1 = vec![0.0; a];
            let mut s2 = vec![0.0; a];
            for bi in 0..bsz {
                let r = chunk(bi, f);
                for (dv, hh) in dg[r.clone()].chunks_exact(a).zip(hhat[r].chunks_exact(a)) {
                    for ch in 0..a {
                        bn_gamma[ch] += dv[ch] * hh[ch];
                        bn_beta[ch] += dv[ch];
                        let dhh = dv[ch] * ibn.gamma[ch];
                        s1[ch] += dhh;
                        s2[ch] += dhh * hh[ch];
                    }
                }
            }
            let nf = group_n as f64;
            let inv = &inner_inv[f];
            for bi in 0..bsz {
                let r = chunk(bi, f);
                for (dv, hh) in dg[r.clone()].chunks_exact_mut(a).zip(hhat[r].chunks_exact(a)) {
                    for ch in 0..a {
                        let dhh = dv[ch] * ibn.gamma[ch];
                        dv[ch] = inv[ch] / nf * (nf * dhh - s1[ch] - hh[ch] * s2[ch]);
                    }
                }
            }
        }
        // dg now holds the gradient at the first convolution's output.
        let mut dw1 = vec![0.0; a * k1];
        for bi in 0..bsz {
            let ub = &u[bi * l..(bi + 1) * l];
            let dub = &mut du[bi * l..(bi + 1) * l];
            for (i, dp) in dg[chunk(bi, f)].chunks_exact(pa).enumerate() {
                for (t, dt) in dp.chunks_exact(a).enumerate() {
                    let base = i * stride + t;
                    let inp = &ub[base..base + k1];
                    let dinp = &mut dub[base..base + k1];
                    let rows = dt.iter().zip(blk.w1.chunks_exact(k1)).zip(dw1.chunks_exact_mut(k1));
                    for ((&dh, w), dw) in rows {
                        if dh == 0.0 {
                            continue;
                        }
                        for j in 0..k1 {
                            dw[j] += dh * inp[j];
                            dinp[j] += dh * w[j];
                        }
                    }
                }
            }
        }
        blocks.push(BlockGradients {
            w1: dw1,
            bn_gamma,
            bn_beta,
            w2: dw2,
        });
    }

    // Input batch-norm backward (through the step).
    let mut input_gamma = vec![0.0; l];
    let mut input_beta = vec![0.0; l];
    for bi in 0..bsz {
        for j in 0..l {
            let e = bi * l + j;
            let dz = du[e] * pass_in[e];
            input_gamma[j] += dz * xhat[e];
            input_beta[j] += dz;
        }
    }

    let grads = Gradients {
        input_gamma,
        input_beta,
        blocks,
        final_gamma,
        final_beta,
        head_weights,
        head_mask,
        head_bias: d_bias,
    };
    let stats = BatchStats {
        input: (in_mean, in_var),
        inner: inner_stats,
        fin: (fin_mean, fin_var),
    };
    for buf in [xhat, u, pass_in, hhat, g, o, y, yhat, q, keep, ds_out, d_o, du, dg] {
        recycle(buf);
    }
    (loss, grads, stats)
}

/// Mean loss and gradients of a batch in training mode without dropout.
pub fn loss_and_gradients(model: &TtnetModel, ds: &Dataset, rows: &[usize]) -> (f64, Gradients) {
    let (loss, grads, _) = forward_backward(model, ds, rows, 0.0, None);
    (loss, grads)
}

/// Adam with the usual defaults.
struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    fn apply(&mut self, model: &mut TtnetModel, grads: &Gradients) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        let mut slot = 0;
        let mut update = |param: &mut [f64], grad: &[f64]| {
            if self.m.len() <= slot {
                self.m.push(vec![0.0; param.len()]);
                self.v.push(vec![0.0; param.len()]);
            }
            let (m, v) = (&mut self.m[slot], &mut self.v[slot]);
            for ((p, g), (mi, vi)) in param.iter_mut().zip(grad).zip(m.iter_mut().zip(v.iter_mut())) {
                *mi = self.beta1 * *mi + (1.0 - self.beta1) * g;
                *vi = self.beta2 * *vi + (1.0 - self.beta2) * g * g;
                let mh = *mi / bc1;
                let vh = *vi / bc2;
                *p -= self.lr * mh / (vh.sqrt() + self.eps);
            }
            slot += 1;
        };
        update(&mut model.input_bn.gamma, &grads.input_gamma);
        update(&mut model.input_bn.beta, &grads.input_beta);
        for (blk, bg) in model.blocks.iter_mut().zip(&grads.blocks) {
            update(&mut blk.w1, &bg.w1);
            if let Some(bn) = &mut blk.inner_bn {
                update(&mut bn.gamma, &bg.bn_gamma);
                update(&mut bn.beta, &bg.bn_beta);
            }
            update(&mut blk.w2, &bg.w2);
        }
        update(&mut model.final_bn.gamma, &grads.final_gamma);
        update(&mut model.final_bn.beta, &grads.final_beta);
        update(&mut model.head.weights, &grads.head_weights);
        if model.head.mode == HeadMode::BinarySparse {
            update(&mut model.head.mask, &grads.head_mask);
        }
        update(&mut model.head.bias, &grads.head_bias);
    }
}

/// Train a fresh model on `rows` of `dataset`. Deterministic for a given
/// config (including seed); batch-norm statistics are recomputed on `rows`
/// after the last epoch.
pub fn train(dataset: &Dataset, rows: &[usize], config: &TrainConfig) -> Result<TtnetModel> {
    train_with_progress(dataset, rows, config, |_, _| {})
}

/// [`train`] with a callback receiving `(epoch, mean loss)` after each epoch.
pub fn train_with_progress<F: FnMut(usize, f64)>(
    dataset: &Dataset,
    rows: &[usize],
    config: &TrainConfig,
    mut progress: F,
) -> Result<TtnetModel> {
    config.validate()?;
    if rows.len() < 2 {
        return Err(Error::Input("need at least two training rows".into()));
    }
    let outputs = dataset.num_classes().unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = TtnetModel::random(
        dataset.schema().clone(),
        dataset.task(),
        outputs,
        config.spec,
        config.filters,
        config.head_mode,
        if config.head_mode == HeadMode::Float {
            config.dropout_p
        } else {
            0.0
        },
        &mut rng,
    )?;
    model.target_scaler = dataset.target_scaler();
    let mut adam = Adam::new(config.learning_rate);
    let mut order = rows.to_vec();
    let use_dropout = config.head_mode == HeadMode::Float && config.dropout_p > 0.0;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut seen = 0usize;
        for batch in order.chunks(config.batch_size) {
            // Batch statistics are undefined on a single row.
            if batch.len() < 2 {
                continue;
            }
            let (loss, grads, stats) = forward_backward(
                &model,
                dataset,
                batch,
                config.mask_weight_decay,
                if use_dropout { Some(&mut rng) } else { None },
            );
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch });
            }
            total += loss * batch.len() as f64;
            seen += batch.len();
            adam.apply(&mut model, &grads);
            let n = batch.len();
            model
                .input_bn
                .momentum_update(&stats.input.0, &unbiased(&stats.input.1, n));
            let group = n * model.num_patches() * model.spec.k2;
            for (blk, st) in model.blocks.iter_mut().zip(&stats.inner) {
                if let (Some(bn), Some((m, v))) = (&mut blk.inner_bn, st) {
                    bn.momentum_update(m, &unbiased(v, group));
                }
            }
            model
                .final_bn
                .momentum_update(&stats.fin.0, &unbiased(&stats.fin.1, n));
        }
        let mean = total / seen.max(1) as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        progress(epoch, mean);
    }
    model.bn_finalized = false;
    Ok(recompute_bn_stats(&model, dataset, rows))
}

/// Running accumulator for a mean and population variance (Welford).
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn var(&self) -> f64 {
        if self.n > 0.0 {
            (self.m2 / self.n).max(0.0)
        } else {
            0.0
        }
    }
}

/// Replace every batch-norm's running statistics by the exact mean and
/// population variance of its input over `rows`, layer by layer.
pub fn recompute_bn_stats(model: &TtnetModel, dataset: &Dataset, rows: &[usize]) -> TtnetModel {
    let mut m = model.clone();
    let l = m.num_features();

    let mut acc = vec![Moments::default(); l];
    for &r in rows {
        for (a, x) in acc.iter_mut().zip(dataset.row(r)) {
            a.push(*x);
        }
    }
    m.input_bn.running_mean = acc.iter().map(|a| a.mean).collect();
    m.input_bn.running_var = acc.iter().map(Moments::var).collect();

    let LttSpec {
        amplification: a,
        k1,
        k2,
        stride,
        ..
    } = m.spec;
    let p_count = m.num_patches();
    if m.blocks.iter().any(|b| b.inner_bn.is_some()) {
        let mut acc = vec![vec![Moments::default(); a]; m.num_filters()];
        for &r in rows {
            let bits = m.input_bits(dataset.row(r));
            for (f, blk) in m.blocks.iter().enumerate() {
                if blk.inner_bn.is_none() {
                    continue;
                }
                for i in 0..p_count {
                    for t in 0..k2 {
                        let base = i * stride + t;
                        for ch in 0..a {
                            let w = &blk.w1[ch * k1..(ch + 1) * k1];
                            let mut h = 0.0;
                            for (j, wj) in w.iter().enumerate() {
                                if bits[base + j] {
                                    h += wj;
                                }
                            }
                            acc[f][ch].push(h);
                        }
                    }
                }
            }
        }
        for (blk, acc) in m.blocks.iter_mut().zip(&acc) {
            if let Some(bn) = &mut blk.inner_bn {
                bn.running_mean = acc.iter().map(|a| a.mean).collect();
                bn.running_var = acc.iter().map(Moments::var).collect();
            }
        }
    }

    let mut acc = vec![Moments::default(); m.num_slots()];
    for &r in rows {
        for (a, s) in acc.iter_mut().zip(m.slot_bits(dataset.row(r))) {
            a.push(if s { 1.0 } else { 0.0 });
        }
    }
    m.final_bn.running_mean = acc.iter().map(|a| a.mean).collect();
    m.final_bn.running_var = acc.iter().map(Moments::var).collect();
    m.bn_finalized = true;
    m
}
