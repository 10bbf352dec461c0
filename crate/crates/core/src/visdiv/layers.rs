//! Dense CHW kernels with hand-written backward passes.

use crate::scalar::Scalar;

/// 3×3 convolution, stride 1, zero padding 1. `w` is `[out][in][3][3]`.
pub(crate) fn conv3x3<T: Scalar>(x: &[T], cin: usize, h: usize, w: usize, wt: &[T], b: &[T], cout: usize) -> Vec<T> {
    let hw = h * w;
    let mut y = vec![T::zero(); cout * hw];
    for o in 0..cout {
        y[o * hw..(o + 1) * hw].fill(b[o]);
        for c in 0..cin {
            let xc = &x[c * hw..(c + 1) * hw];
            for ky in 0..3 {
                for kx in 0..3 {
                    let k = wt[((o * cin + c) * 3 + ky) * 3 + kx];
                    let (j0, j1) = (usize::from(kx == 0), if kx == 2 { w - 1 } else { w });
                    for i in 0..h {
                        let si = i + ky;
                        if si == 0 || si > h {
                            continue;
                        }
                        let src = &xc[(si - 1) * w..si * w];
                        let dst = &mut y[o * hw + i * w..o * hw + (i + 1) * w];
                        for j in j0..j1 {
                            dst[j] += k * src[j + kx - 1];
                        }
                    }
                }
            }
        }
    }
    y
}

/// Accumulates weight and bias gradients and returns `dx` when asked.
#[allow(clippy::too_many_arguments)]
pub(crate) fn conv3x3_backward<T: Scalar>(
    x: &[T],
    cin: usize,
    h: usize,
    w: usize,
    wt: &[T],
    cout: usize,
    dy: &[T],
    dw: &mut [T],
    db: &mut [T],
    want_dx: bool,
) -> Option<Vec<T>> {
    let hw = h * w;
    let mut dx = want_dx.then(|| vec![T::zero(); cin * hw]);
    for o in 0..cout {
        let dyo = &dy[o * hw..(o + 1) * hw];
        db[o] += dyo.iter().copied().sum::<T>();
        for c in 0..cin {
            let xc = &x[c * hw..(c + 1) * hw];
            for ky in 0..3 {
                for kx in 0..3 {
                    let widx = ((o * cin + c) * 3 + ky) * 3 + kx;
                    let k = wt[widx];
                    let (j0, j1) = (usize::from(kx == 0), if kx == 2 { w - 1 } else { w });
                    let mut acc = T::zero();
                    for i in 0..h {
                        let si = i + ky;
                        if si == 0 || si > h {
                            continue;
                        }
                        let src = (si - 1) * w;
                        let g = &dyo[i * w..(i + 1) * w];
                        for j in j0..j1 {
                            acc += g[j] * xc[src + j + kx - 1];
                        }
                        if let Some(dx) = dx.as_mut() {
                            let dst = &mut dx[c * hw + src..c * hw + src + w];
                            for j in j0..j1 {
                                dst[j + kx - 1] += k * g[j];
                            }
                        }
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
    dx
}

/// Transposed 3×3 convolution, stride 2, padding 1, output padding 1:
/// `(cin, h, w) → (cout, 2h, 2w)`. `w` is `[in][out][3][3]`.
pub(crate) fn deconv3x3<T: Scalar>(x: &[T], cin: usize, h: usize, w: usize, wt: &[T], b: &[T], cout: usize) -> Vec<T> {
    let (oh, ow) = (2 * h, 2 * w);
    let ohw = oh * ow;
    let mut y = vec![T::zero(); cout * ohw];
    for o in 0..cout {
        y[o * ohw..(o + 1) * ohw].fill(b[o]);
    }
    for c in 0..cin {
        let xc = &x[c * h * w..(c + 1) * h * w];
        for o in 0..cout {
            for ky in 0..3 {
                for kx in 0..3 {
                    let k = wt[((c * cout + o) * 3 + ky) * 3 + kx];
                    for iy in 0..h {
                        let oy = 2 * iy + ky;
                        if oy == 0 || oy > oh {
                            continue;
                        }
                        let row = o * ohw + (oy - 1) * ow;
                        for ix in usize::from(kx == 0)..w {
                            y[row + 2 * ix + kx - 1] += k * xc[iy * w + ix];
                        }
                    }
                }
            }
        }
    }
    y
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn deconv3x3_backward<T: Scalar>(
    x: &[T],
    cin: usize,
    h: usize,
    w: usize,
    wt: &[T],
    cout: usize,
    dy: &[T],
    dw: &mut [T],
    db: &mut [T],
) -> Vec<T> {
    let (oh, ow) = (2 * h, 2 * w);
    let ohw = oh * ow;
    for o in 0..cout {
        db[o] += dy[o * ohw..(o + 1) * ohw].iter().copied().sum::<T>();
    }
    let mut dx = vec![T::zero(); cin * h * w];
    for c in 0..cin {
        let xc = &x[c * h * w..(c + 1) * h * w];
        for o in 0..cout {
            for ky in 0..3 {
                for kx in 0..3 {
                    let widx = ((c * cout + o) * 3 + ky) * 3 + kx;
                    let k = wt[widx];
                    let mut acc = T::zero();
                    for iy in 0..h {
                        let oy = 2 * iy + ky;
                        if oy == 0 || oy > oh {
                            continue;
                        }
                        let row = o * ohw + (oy - 1) * ow;
                        for ix in usize::from(kx == 0)..w {
                            let g = dy[row + 2 * ix + kx - 1];
                            acc += g * xc[iy * w + ix];
                            dx[c * h * w + iy * w + ix] += k * g;
                        }
                    }
                    dw[widx] += acc;
                }
            }
        }
    }
    dx
}

/// 2×2 max-pool, stride 2. Returns the pooled map and the flat input index
/// of each winner; the first maximum in row-major order wins ties.
pub(crate) fn maxpool2<T: Scalar>(x: &[T], c: usize, h: usize, w: usize) -> (Vec<T>, Vec<usize>) {
    let (ph, pw) = (h / 2, w / 2);
    let mut y = Vec::with_capacity(c * ph * pw);
    let mut arg = Vec::with_capacity(c * ph * pw);
    for ch in 0..c {
        for i in 0..ph {
            for j in 0..pw {
                let mut best = ch * h * w + 2 * i * w + 2 * j;
                for (di, dj) in [(0, 1), (1, 0), (1, 1)] {
                    let idx = ch * h * w + (2 * i + di) * w + 2 * j + dj;
                    if x[idx] > x[best] {
                        best = idx;
                    }
                }
                y.push(x[best]);
                arg.push(best);
            }
        }
    }
    (y, arg)
}

pub(crate) fn maxpool2_backward<T: Scalar>(dy: &[T], arg: &[usize], input_len: usize) -> Vec<T> {
    let mut dx = vec![T::zero(); input_len];
    for (&g, &i) in dy.iter().zip(arg) {
        dx[i] += g;
    }
    dx
}

/// `y = W·x + b` with `W` stored `[out][in]`.
pub(crate) fn dense<T: Scalar>(x: &[T], wt: &[T], b: &[T]) -> Vec<T> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(o, &bo)| bo + wt[o * n..(o + 1) * n].iter().zip(x).map(|(&a, &v)| a * v).sum::<T>())
        .collect()
}

pub(crate) fn dense_backward<T: Scalar>(
    x: &[T],
    wt: &[T],
    dy: &[T],
    dw: &mut [T],
    db: &mut [T],
    want_dx: bool,
) -> Option<Vec<T>> {
    let n = x.len();
    let mut dx = want_dx.then(|| vec![T::zero(); n]);
    for (o, &g) in dy.iter().enumerate() {
        db[o] += g;
        if g == T::zero() {
            continue;
        }
        let row = &mut dw[o * n..(o + 1) * n];
        for (d, &v) in row.iter_mut().zip(x) {
            *d += g * v;
        }
        if let Some(dx) = dx.as_mut() {
            for (d, &a) in dx.iter_mut().zip(&wt[o * n..(o + 1) * n]) {
                *d += g * a;
            }
        }
    }
    dx
}

pub(crate) fn leaky<T: Scalar>(v: &[T], slope: T) -> Vec<T> {
    v.iter().map(|&x| if x > T::zero() { x } else { slope * x }).collect()
}

/// Multiplies `g` by the leaky-ReLU derivative at pre-activation `pre`.
pub(crate) fn leaky_backward<T: Scalar>(g: &mut [T], pre: &[T], slope: T) {
    for (d, &x) in g.iter_mut().zip(pre) {
        if x <= T::zero() {
            *d *= slope;
        }
    }
}

pub(crate) fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}
