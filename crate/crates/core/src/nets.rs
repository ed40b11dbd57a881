//! Batched building blocks: multilayer perceptrons and an LSTM cell.
//!
//! All ops act on `n x d` matrices where each row is one person, so a single
//! set of weights is shared by everyone in the batch.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{Param, Parameters, Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Linear,
}

#[derive(Clone, Debug)]
pub struct Layer {
    /// `in x out`, applied as `x · W`.
    pub weight: Param,
    /// `1 x out`.
    pub bias: Param,
    pub activation: Activation,
}

#[derive(Clone, Debug)]
pub struct Mlp {
    layers: Vec<Layer>,
}

impl Mlp {
    /// `dims = [in, h1, ..., out]`. Hidden layers use ReLU; the last uses `last`.
    pub fn new<R: Rng + ?Sized>(
        prefix: &str,
        dims: &[usize],
        last: Activation,
        rng: &mut R,
    ) -> Self {
        assert!(
            dims.len() >= 2,
            "an MLP needs at least input and output dims"
        );
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|i| Layer {
                weight: Param::uniform(
                    format!("{prefix}.{i}.w"),
                    dims[i],
                    dims[i + 1],
                    dims[i],
                    rng,
                ),
                bias: Param::zeros(format!("{prefix}.{i}.b"), 1, dims[i + 1]),
                activation: if i + 1 == n { last } else { Activation::Relu },
            })
            .collect();
        Self { layers }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].weight.value().rows()
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().expect("non-empty").weight.value().cols()
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let (_, cols) = tape.value(x).shape();
        if cols != self.in_dim() {
            return Err(Error::Dimension {
                op: "mlp_forward",
                lhs: tape.value(x).shape(),
                rhs: self.layers[0].weight.value().shape(),
            });
        }
        let mut h = x;
        for layer in &self.layers {
            let w = tape.param(&layer.weight);
            let b = tape.param(&layer.bias);
            let z = tape.matmul(h, w)?;
            let z = tape.add_row(z, b)?;
            h = match layer.activation {
                Activation::Relu => tape.relu(z),
                Activation::Linear => z,
            };
        }
        Ok(h)
    }
}

impl Parameters for Mlp {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        for l in &self.layers {
            f(&l.weight);
            f(&l.bias);
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        for l in &mut self.layers {
            f(&mut l.weight);
            f(&mut l.bias);
        }
    }
}

/// Hidden output `h` and cell memory `m`, one row per person.
#[derive(Clone, Copy, Debug)]
pub struct LstmState {
    pub h: Var,
    pub m: Var,
}

impl LstmState {
    pub fn zeros(tape: &mut Tape, rows: usize, hidden: usize) -> Self {
        Self {
            h: tape.leaf(Tensor::zeros(rows, hidden)),
            m: tape.leaf(Tensor::zeros(rows, hidden)),
        }
    }
}

/// LSTM cell with gate order input, forget, candidate, output.
#[derive(Clone, Debug)]
pub struct LstmCell {
    /// `in x 4h`
    pub w_input: Param,
    /// `h x 4h`
    pub w_hidden: Param,
    /// `1 x 4h`, forget slice initialized to 1.
    pub bias: Param,
}

impl LstmCell {
    pub fn new<R: Rng + ?Sized>(prefix: &str, input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut bias = Param::zeros(format!("{prefix}.b"), 1, 4 * hidden);
        bias.value_mut().data_mut()[hidden..2 * hidden].fill(1.0);
        Self {
            w_input: Param::uniform(format!("{prefix}.wx"), input, 4 * hidden, input, rng),
            w_hidden: Param::uniform(format!("{prefix}.wh"), hidden, 4 * hidden, hidden, rng),
            bias,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w_input.value().rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_hidden.value().rows()
    }

    pub fn step(&self, tape: &mut Tape, state: LstmState, x: Var) -> Result<LstmState> {
        let hd = self.hidden_dim();
        let (rows, cols) = tape.value(x).shape();
        if cols != self.input_dim() || tape.value(state.h).shape() != (rows, hd) {
            return Err(Error::Dimension {
                op: "lstm_step",
                lhs: (rows, cols),
                rhs: (self.input_dim(), hd),
            });
        }
        let wx = tape.param(&self.w_input);
        let wh = tape.param(&self.w_hidden);
        let b = tape.param(&self.bias);
        let zx = tape.matmul(x, wx)?;
        let zh = tape.matmul(state.h, wh)?;
        let z = tape.add(zx, zh)?;
        let z = tape.add_row(z, b)?;

        let i = tape.slice_cols(z, 0..hd)?;
        let f = tape.slice_cols(z, hd..2 * hd)?;
        let g = tape.slice_cols(z, 2 * hd..3 * hd)?;
        let o = tape.slice_cols(z, 3 * hd..4 * hd)?;
        let i = tape.sigmoid(i);
        let f = tape.sigmoid(f);
        let g = tape.tanh(g);
        let o = tape.sigmoid(o);

        let keep = tape.mul(f, state.m)?;
        let write = tape.mul(i, g)?;
        let m = tape.add(keep, write)?;
        let squashed = tape.tanh(m);
        let h = tape.mul(o, squashed)?;
        Ok(LstmState { h, m })
    }
}

impl Parameters for LstmCell {
    fn visit(&self, f: &mut dyn FnMut(&Param)) {
        f(&self.w_input);
        f(&self.w_hidden);
        f(&self.bias);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
        f(&mut self.w_input);
        f(&mut self.w_hidden);
        f(&mut self.bias);
    }
}

/// Embeds each input with `embed` and folds the cell over them from a zero state.
pub fn encode_sequence(
    tape: &mut Tape,
    cell: &LstmCell,
    embed: &Mlp,
    inputs: &[Var],
) -> Result<LstmState> {
    let first = *inputs.first().ok_or(Error::Empty("encode_sequence"))?;
    let rows = tape.value(first).rows();
    let mut state = LstmState::zeros(tape, rows, cell.hidden_dim());
    for &x in inputs {
        let e = embed.forward(tape, x)?;
        state = cell.step(tape, state, e)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::numerics::{finite_diff_check, sigmoid};

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    fn set(p: &mut Param, rows: usize, cols: usize, data: &[f64]) {
        p.set_value(Tensor::new(rows, cols, data.to_vec()).unwrap());
    }

    #[test]
    fn zero_mlp_gives_zero() {
        let mut mlp = Mlp::new("m", &[3, 5, 2], Activation::Linear, &mut rng());
        mlp.zero_values();
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::row(&[4.0, -7.0, 1.5]));
        let y = mlp.forward(&mut tape, x).unwrap();
        assert_eq!(tape.value(y).data(), &[0.0, 0.0]);
    }

    #[test]
    fn single_linear_layer_is_affine() {
        let mlp = Mlp::new("m", &[3, 2], Activation::Linear, &mut rng());
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::new(2, 3, vec![1., 2., 3., -1., 0., 0.5]).unwrap());
        let y = mlp.forward(&mut tape, x).unwrap();
        let l = &mlp.layers()[0];
        let mut expect = tape.value(x).matmul(l.weight.value()).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let v = expect.get(r, c) + l.bias.value().get(0, c);
                expect.set(r, c, v);
            }
        }
        assert_eq!(tape.value(y), &expect);
    }

    #[test]
    fn two_layer_relu_hand_oracle() {
        // x = [1, 2]; W1 = [[1, -1], [0.5, 1]], b1 = [0, -3]
        //   z1 = [1 + 1, -1 + 2 - 3] = [2, -2] -> relu [2, 0]
        // W2 = [[3], [5]], b2 = [0.25] -> 6.25
        let mut mlp = Mlp::new("m", &[2, 2, 1], Activation::Linear, &mut rng());
        let layers = mlp.layers_mut();
        set(&mut layers[0].weight, 2, 2, &[1., -1., 0.5, 1.]);
        set(&mut layers[0].bias, 1, 2, &[0., -3.]);
        set(&mut layers[1].weight, 2, 1, &[3., 5.]);
        set(&mut layers[1].bias, 1, 1, &[0.25]);
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::row(&[1., 2.]));
        let y = mlp.forward(&mut tape, x).unwrap();
        assert_eq!(tape.value(y).item(), 6.25);
    }

    #[test]
    fn mlp_dim_mismatch() {
        let mlp = Mlp::new("m", &[3, 2], Activation::Linear, &mut rng());
        let mut tape = Tape::new();
        let x = tape.leaf(Tensor::row(&[1.0, 2.0]));
        assert!(matches!(
            mlp.forward(&mut tape, x),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn lstm_zero_case() {
        let mut cell = LstmCell::new("c", 3, 4, &mut rng());
        cell.zero_values();
        let mut tape = Tape::new();
        let s = LstmState::zeros(&mut tape, 1, 4);
        let x = tape.leaf(Tensor::row(&[9., -2., 0.3]));
        let out = cell.step(&mut tape, s, x).unwrap();
        assert!(tape.value(out.h).data().iter().all(|&v| v == 0.0));
        assert!(tape.value(out.m).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lstm_saturated_memory() {
        // forget +50, input/output -50: m' = σ(50)·m + σ(-50)·g ≈ m, h' ≈ 0
        let mut cell = LstmCell::new("c", 2, 2, &mut rng());
        cell.zero_values();
        set(
            &mut cell.bias,
            1,
            8,
            &[-50., -50., 50., 50., 0., 0., -50., -50.],
        );
        let mut tape = Tape::new();
        let s = LstmState {
            h: tape.leaf(Tensor::row(&[0.0, 0.0])),
            m: tape.leaf(Tensor::row(&[0.7, -1.3])),
        };
        let x = tape.leaf(Tensor::row(&[1.0, 1.0]));
        let out = cell.step(&mut tape, s, x).unwrap();
        let m = tape.value(out.m).data();
        assert!((m[0] - 0.7).abs() < 1e-12 && (m[1] + 1.3).abs() < 1e-12);
        assert!(tape.value(out.h).max_abs() < 1e-12);
    }

    #[test]
    fn lstm_hand_oracle() {
        // 1-input, 1-unit cell with all gate weights on the input only.
        // wx = [a_i, a_f, a_g, a_o], x = 1, h = 0, m = 0.5, bias as given.
        let mut cell = LstmCell::new("c", 1, 1, &mut rng());
        set(&mut cell.w_input, 1, 4, &[0.5, -0.25, 1.0, 2.0]);
        set(&mut cell.w_hidden, 1, 4, &[0.3, 0.3, 0.3, 0.3]);
        set(&mut cell.bias, 1, 4, &[0.0, 1.0, -0.5, 0.0]);
        let mut tape = Tape::new();
        let s = LstmState {
            h: tape.leaf(Tensor::scalar(0.0)),
            m: tape.leaf(Tensor::scalar(0.5)),
        };
        let x = tape.leaf(Tensor::scalar(1.0));
        let out = cell.step(&mut tape, s, x).unwrap();
        let (i, f, g, o) = (sigmoid(0.5), sigmoid(0.75), 0.5_f64.tanh(), sigmoid(2.0));
        let m = f * 0.5 + i * g;
        let h = o * m.tanh();
        assert!((tape.value(out.m).item() - m).abs() < 1e-15);
        assert!((tape.value(out.h).item() - h).abs() < 1e-15);
    }

    #[test]
    fn encode_sequence_properties() {
        let mut r = rng();
        let embed = Mlp::new("e", &[2, 16], Activation::Relu, &mut r);
        let cell = LstmCell::new("c", 16, 16, &mut r);

        let mut tape = Tape::new();
        assert!(encode_sequence(&mut tape, &cell, &embed, &[]).is_err());

        // identical rows in, identical rows out (shared weights)
        let rows = Tensor::new(2, 2, vec![0.3, -0.1, 0.3, -0.1]).unwrap();
        let xs: Vec<Var> = (0..5).map(|_| tape.leaf(rows.clone())).collect();
        let s = encode_sequence(&mut tape, &cell, &embed, &xs).unwrap();
        let h = tape.value(s.h);
        assert_eq!(h.row_slice(0), h.row_slice(1));

        // fold base case
        let x = tape.leaf(rows.clone());
        let one = encode_sequence(&mut tape, &cell, &embed, &[x]).unwrap();
        let z = LstmState::zeros(&mut tape, 2, 16);
        let e = embed.forward(&mut tape, x).unwrap();
        let manual = cell.step(&mut tape, z, e).unwrap();
        assert_eq!(tape.value(one.h), tape.value(manual.h));
        assert_eq!(tape.value(one.m), tape.value(manual.m));
    }

    struct Enc {
        embed: Mlp,
        cell: LstmCell,
    }

    impl Parameters for Enc {
        fn visit(&self, f: &mut dyn FnMut(&Param)) {
            self.embed.visit(f);
            self.cell.visit(f);
        }
        fn visit_mut(&mut self, f: &mut dyn FnMut(&mut Param)) {
            self.embed.visit_mut(f);
            self.cell.visit_mut(f);
        }
    }

    #[test]
    fn encode_sequence_bptt_gradcheck() {
        let mut checked = 0;
        for seed in 0..5 {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            let mut enc = Enc {
                embed: Mlp::new("e", &[2, 16], Activation::Relu, &mut r),
                cell: LstmCell::new("c", 16, 16, &mut r),
            };
            enc.embed.layers_mut()[0].bias.randomize(0.1, &mut r);
            let seq: Vec<Tensor> = (0..8)
                .map(|_| {
                    Tensor::new(2, 2, (0..4).map(|_| r.random_range(-0.5..0.5)).collect()).unwrap()
                })
                .collect();
            let check = finite_diff_check(
                &mut enc,
                |enc, tape| {
                    let xs: Vec<Var> = seq.iter().map(|t| tape.leaf(t.clone())).collect();
                    let s = encode_sequence(tape, &enc.cell, &enc.embed, &xs)?;
                    let sq = tape.mul(s.h, s.h)?;
                    let hm = tape.add(sq, s.m)?;
                    Ok(tape.sum(hm))
                },
                1e-5,
                None,
            )
            .unwrap();
            if check.kink_margin < 1e-4 {
                continue;
            }
            checked += 1;
            assert!(check.max_rel_error <= 1e-4, "seed {seed}: {check:?}");
        }
        assert!(checked >= 3);
    }
}
