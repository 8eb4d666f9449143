use super::{masked_softmax, Params, PolicyNet};
use crate::error::{Error, Result};

/// One visited state with the action taken there and its return `G_t`.
#[derive(Clone, Copy, Debug)]
pub struct StepSample<'a> {
    pub features: &'a [f64],
    pub mask: &'a [bool],
    pub action: usize,
    pub ret: f64,
}

/// Accumulates into `grads` the gradient of
/// `loss = -sum_t log pi(a_t | s_t) * (G_t - baseline)` and returns the loss.
pub fn policy_gradient(
    net: &PolicyNet,
    steps: &[StepSample<'_>],
    baseline: f64,
    grads: &mut Params,
) -> Result<f64> {
    let d = net.dims();
    let p = net.params();
    let mut h = Vec::with_capacity(d.hidden);
    let mut dh = vec![0.0; d.hidden];
    let mut logits = vec![f64::NEG_INFINITY; d.output];
    let mut loss = 0.0;

    for s in steps {
        net.check_inputs(s.features, s.mask)?;
        if !s.mask.get(s.action).copied().unwrap_or(false) {
            return Err(Error::UnknownAction {
                id: s.action,
                size: d.output,
            });
        }
        let adv = s.ret - baseline;
        if adv == 0.0 {
            continue;
        }
        net.hidden(s.features, &mut h);
        for (k, z) in logits.iter_mut().enumerate() {
            *z = if s.mask[k] {
                net.logit(&h, k)
            } else {
                f64::NEG_INFINITY
            };
        }
        let probs = masked_softmax(&logits, s.mask);
        loss -= probs[s.action].ln() * adv;

        // dL/dlogit_k = adv * (pi_k - [k == a]) on valid entries only.
        dh.fill(0.0);
        for k in (0..d.output).filter(|&k| s.mask[k]) {
            let g = adv * (probs[k] - if k == s.action { 1.0 } else { 0.0 });
            if g == 0.0 {
                continue;
            }
            grads.b2[k] += g;
            let row = k * d.hidden;
            let w2_row = &p.w2[row..row + d.hidden];
            for ((gw, &hi), (dhi, &w)) in grads.w2[row..row + d.hidden]
                .iter_mut()
                .zip(&h)
                .zip(dh.iter_mut().zip(w2_row))
            {
                *gw += g * hi;
                *dhi += g * w;
            }
        }
        for (i, &dhi) in dh.iter().enumerate() {
            // relu'(z) = [z > 0], and h_i > 0 iff z_i > 0.
            if h[i] <= 0.0 || dhi == 0.0 {
                continue;
            }
            grads.b1[i] += dhi;
            let row = i * d.input;
            for (gw, &x) in grads.w1[row..row + d.input].iter_mut().zip(s.features) {
                *gw += dhi * x;
            }
        }
    }
    Ok(loss)
}
