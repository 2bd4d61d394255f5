//! Layer kernels over a flat parameter buffer. Each layer stores offsets
//! into the buffer; gradients use the same layout.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    /// Glorot fan sizes, or `None` for zero-initialized biases.
    pub fans: Option<(usize, usize)>,
}

impl TensorSpec {
    /// Number of scalar entries.
    pub fn size(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.size()
    }
}

#[derive(Debug, Default)]
pub struct Layout {
    pub tensors: Vec<TensorSpec>,
    pub len: usize,
}

impl Layout {
    pub fn add(&mut self, name: String, shape: Vec<usize>, fans: Option<(usize, usize)>) -> usize {
        let offset = self.len;
        let spec = TensorSpec {
            name,
            shape,
            offset,
            fans,
        };
        self.len += spec.size();
        self.tensors.push(spec);
        offset
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out = W x + b` with `W` stored `[n_out, n_in]`.
#[derive(Debug, Clone, Copy)]
pub struct Dense {
    pub w: usize,
    pub b: usize,
    pub n_in: usize,
    pub n_out: usize,
}

impl Dense {
    pub fn new(layout: &mut Layout, name: &str, n_in: usize, n_out: usize) -> Self {
        let w = layout.add(format!("{name}.weight"), vec![n_out, n_in], Some((n_in, n_out)));
        let b = layout.add(format!("{name}.bias"), vec![n_out], None);
        Self { w, b, n_in, n_out }
    }

    pub fn forward(&self, p: &[f64], x: &[f64]) -> Vec<f64> {
        let w = &p[self.w..self.w + self.n_in * self.n_out];
        (0..self.n_out)
            .map(|r| {
                let row = &w[r * self.n_in..(r + 1) * self.n_in];
                p[self.b + r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// Accumulates parameter gradients and returns `∂L/∂x`.
    pub fn backward(&self, p: &[f64], x: &[f64], dout: &[f64], g: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.n_in];
        for (r, &d) in dout.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g[self.b + r] += d;
            let base = self.w + r * self.n_in;
            for k in 0..self.n_in {
                g[base + k] += d * x[k];
                dx[k] += d * p[base + k];
            }
        }
        dx
    }
}

/// Single-input-channel valid convolution, weights `[filters, kernel]`.
#[derive(Debug, Clone, Copy)]
pub struct Conv1d {
    pub w: usize,
    pub b: usize,
    pub filters: usize,
    pub kernel: usize,
}

impl Conv1d {
    pub fn new(layout: &mut Layout, name: &str, filters: usize, kernel: usize) -> Self {
        let w = layout.add(
            format!("{name}.weight"),
            vec![filters, kernel],
            Some((kernel, filters * kernel)),
        );
        let b = layout.add(format!("{name}.bias"), vec![filters], None);
        Self { w, b, filters, kernel }
    }

    pub fn out_len(&self, len: usize) -> usize {
        len + 1 - self.kernel
    }

    /// Pre-activations, `[filters, out_len]` row-major.
    pub fn forward(&self, p: &[f64], seq: &[f64]) -> Vec<f64> {
        let out_len = self.out_len(seq.len());
        let mut out = Vec::with_capacity(self.filters * out_len);
        for f in 0..self.filters {
            let w = &p[self.w + f * self.kernel..self.w + (f + 1) * self.kernel];
            for t in 0..out_len {
                out.push(p[self.b + f] + w.iter().zip(&seq[t..t + self.kernel]).map(|(a, b)| a * b).sum::<f64>());
            }
        }
        out
    }

    pub fn backward(&self, seq: &[f64], dpre: &[f64], g: &mut [f64]) {
        let out_len = self.out_len(seq.len());
        for f in 0..self.filters {
            for t in 0..out_len {
                let d = dpre[f * out_len + t];
                if d == 0.0 {
                    continue;
                }
                g[self.b + f] += d;
                for k in 0..self.kernel {
                    g[self.w + f * self.kernel + k] += d * seq[t + k];
                }
            }
        }
    }
}

/// LSTM over a scalar sequence. Gate blocks are ordered input, forget,
/// candidate, output; `wx` is `[4H]`, `wh` is `[4H, H]`.
#[derive(Debug, Clone, Copy)]
pub struct Lstm {
    pub wx: usize,
    pub wh: usize,
    pub b: usize,
    pub hidden: usize,
}

/// Activations of every step, kept for backpropagation through time.
pub struct LstmTrace {
    /// Post-activation gates, `[steps, 4H]`.
    gates: Vec<f64>,
    /// Cell states, `[steps + 1, H]`; row 0 is the zero initial state.
    cells: Vec<f64>,
    /// Hidden states, `[steps + 1, H]`.
    hidden: Vec<f64>,
    steps: usize,
}

impl LstmTrace {
    pub fn final_hidden(&self, h: usize) -> &[f64] {
        &self.hidden[self.steps * h..(self.steps + 1) * h]
    }

    pub fn hidden_at(&self, h: usize, t: usize) -> &[f64] {
        &self.hidden[(t + 1) * h..(t + 2) * h]
    }
}

impl Lstm {
    pub fn new(layout: &mut Layout, name: &str, hidden: usize) -> Self {
        let wx = layout.add(format!("{name}.weight_ih"), vec![4 * hidden, 1], Some((1, 4 * hidden)));
        let wh = layout.add(
            format!("{name}.weight_hh"),
            vec![4 * hidden, hidden],
            Some((hidden, 4 * hidden)),
        );
        let b = layout.add(format!("{name}.bias"), vec![4 * hidden], None);
        Self { wx, wh, b, hidden }
    }

    pub fn forward(&self, p: &[f64], seq: &[f64]) -> LstmTrace {
        let h = self.hidden;
        let steps = seq.len();
        let mut gates = Vec::with_capacity(steps * 4 * h);
        let mut cells = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        cells.reserve(steps * h);
        hidden.reserve(steps * h);
        let mut a = vec![0.0; 4 * h];
        for (t, &x) in seq.iter().enumerate() {
            let h_prev = &hidden[t * h..(t + 1) * h];
            for (r, ar) in a.iter_mut().enumerate() {
                let row = &p[self.wh + r * h..self.wh + (r + 1) * h];
                *ar = p[self.b + r] + p[self.wx + r] * x + row.iter().zip(h_prev).map(|(w, v)| w * v).sum::<f64>();
            }
            for r in 0..4 * h {
                gates.push(if (2 * h..3 * h).contains(&r) {
                    a[r].tanh()
                } else {
                    sigmoid(a[r])
                });
            }
            let gt = &gates[t * 4 * h..(t + 1) * 4 * h];
            for k in 0..h {
                let c = gt[h + k] * cells[t * h + k] + gt[k] * gt[2 * h + k];
                cells.push(c);
            }
            for k in 0..h {
                let c = cells[(t + 1) * h + k];
                hidden.push(gt[3 * h + k] * c.tanh());
            }
        }
        LstmTrace {
            gates,
            cells,
            hidden,
            steps,
        }
    }

    /// Backpropagation through time from a gradient on the final hidden state.
    pub fn backward(&self, p: &[f64], seq: &[f64], trace: &LstmTrace, dh_final: &[f64], g: &mut [f64]) {
        let h = self.hidden;
        let mut dh = dh_final.to_vec();
        let mut dc = vec![0.0; h];
        let mut da = vec![0.0; 4 * h];
        for t in (0..trace.steps).rev() {
            let gt = &trace.gates[t * 4 * h..(t + 1) * 4 * h];
            let c_prev = &trace.cells[t * h..(t + 1) * h];
            let c_now = &trace.cells[(t + 1) * h..(t + 2) * h];
            let h_prev = &trace.hidden[t * h..(t + 1) * h];
            for k in 0..h {
                let (i, f, gg, o) = (gt[k], gt[h + k], gt[2 * h + k], gt[3 * h + k]);
                let tc = c_now[k].tanh();
                let d_o = dh[k] * tc;
                dc[k] += dh[k] * o * (1.0 - tc * tc);
                da[k] = dc[k] * gg * i * (1.0 - i);
                da[h + k] = dc[k] * c_prev[k] * f * (1.0 - f);
                da[2 * h + k] = dc[k] * i * (1.0 - gg * gg);
                da[3 * h + k] = d_o * o * (1.0 - o);
                dc[k] *= f;
            }
            let x = seq[t];
            let mut dh_prev = vec![0.0; h];
            for (r, &d) in da.iter().enumerate() {
                g[self.b + r] += d;
                g[self.wx + r] += d * x;
                let base = self.wh + r * h;
                for k in 0..h {
                    g[base + k] += d * h_prev[k];
                    dh_prev[k] += d * p[base + k];
                }
            }
            dh = dh_prev;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn dense_forward_by_hand() {
        let mut layout = Layout::default();
        let d = Dense::new(&mut layout, "d", 2, 2);
        // W = [[1, 2], [3, 4]], b = [0.5, -1]
        let p = vec![1.0, 2.0, 3.0, 4.0, 0.5, -1.0];
        assert_eq!(layout.len, 6);
        assert_eq!(d.forward(&p, &[1.0, -1.0]), vec![-0.5, -2.0]);
    }

    #[test]
    fn conv_forward_by_hand() {
        let mut layout = Layout::default();
        let c = Conv1d::new(&mut layout, "c", 1, 2);
        let p = vec![1.0, -1.0, 0.25];
        assert_eq!(c.forward(&p, &[3.0, 1.0, 4.0]), vec![2.25, -2.75]);
    }
}
