#include "gibert/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gibert/error.hpp"
#include "kernels.hpp"

namespace gibert::ad {
namespace {

void require_same_shape(std::string_view op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shapes " + shape_string(a.shape()) + " and " +
                         shape_string(b.shape()) + " differ");
  }
}

void require_rank2(std::string_view op, const Tensor& t) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

void require_last_dim(std::string_view op, const Tensor& x, const Tensor& v) {
  if (v.rank() != 1 || x.rank() == 0 || v.dim(0) != x.shape().back()) {
    throw DimensionError(std::string(op) + ": vector " + shape_string(v.shape()) + " does not match last axis of " +
                         shape_string(x.shape()));
  }
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("add", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return a.graph().record("add", std::move(out), {a, b}, [a, b](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    for (Var in : {a, b}) {
      auto gin = g.accumulator(in);
      for (std::size_t i = 0; i < gin.size(); ++i) gin[i] += gout[i];
    }
  });
}

Var sub(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("sub", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return a.graph().record("sub", std::move(out), {a, b}, [a, b](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    auto ga = g.accumulator(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i];
    auto gb = g.accumulator(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gout[i];
  });
}

Var mul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("mul", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return a.graph().record("mul", std::move(out), {a, b}, [a, b](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    auto ga = g.accumulator(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i] * bv[i];
    auto gb = g.accumulator(b);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gout[i] * av[i];
  });
}

Var scale(Var a, double factor) {
  Tensor out = map(a.value(), [factor](double x) { return x * factor; });
  return a.graph().record("scale", std::move(out), {a}, [a, factor](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    auto ga = g.accumulator(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gout[i] * factor;
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double x : a.value().data()) total += x;
  return a.graph().record("sum", Tensor::scalar(total), {a}, [a](Graph& g, std::size_t self) {
    const double gout = g.grad(self)[0];
    for (double& x : g.accumulator(a)) x += gout;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var add_bias(Var x, Var bias) {
  const Tensor& xv = x.value();
  const Tensor& bv = bias.value();
  require_last_dim("add_bias", xv, bv);
  const std::size_t n = bv.size();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = xv[i] + bv[i % n];
  return x.graph().record("add_bias", std::move(out), {x, bias}, [x, bias, n](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    auto gx = g.accumulator(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i];
    auto gb = g.accumulator(bias);
    if (!gb.empty()) {
      for (std::size_t i = 0; i < gout.size(); ++i) gb[i % n] += gout[i];
    }
  });
}

Var mul_rows(Var x, Var v) {
  const Tensor& xv = x.value();
  const Tensor& vv = v.value();
  require_last_dim("mul_rows", xv, vv);
  const std::size_t n = vv.size();
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = vv[i % n] * xv[i];
  return x.graph().record("mul_rows", std::move(out), {x, v}, [x, v, n](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    const Tensor& xv = g.value(x);
    const Tensor& vv = g.value(v);
    auto gx = g.accumulator(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * vv[i % n];
    auto gv = g.accumulator(v);
    if (!gv.empty()) {
      for (std::size_t i = 0; i < gout.size(); ++i) gv[i % n] += gout[i] * xv[i];
    }
  });
}

Var matmul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul", av);
  require_rank2("matmul", bv);
  if (av.dim(1) != bv.dim(0)) {
    throw DimensionError("matmul: inner dimensions of " + shape_string(av.shape()) + " and " +
                         shape_string(bv.shape()) + " differ");
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
  Tensor out({m, n});
  kernels::gemm_nn(m, k, n, av.data().data(), bv.data().data(), out.data().data());
  return a.graph().record("matmul", std::move(out), {a, b}, [a, b, m, k, n](Graph& g, std::size_t self) {
    const double* gout = g.grad(self).data();
    if (auto ga = g.accumulator(a); !ga.empty()) {
      kernels::gemm_nt(m, n, k, gout, g.value(b).data().data(), ga.data());
    }
    if (auto gb = g.accumulator(b); !gb.empty()) {
      kernels::gemm_tn(k, m, n, g.value(a).data().data(), gout, gb.data());
    }
  });
}

Var matmul_transposed(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul_transposed", av);
  require_rank2("matmul_transposed", bv);
  if (av.dim(1) != bv.dim(1)) {
    throw DimensionError("matmul_transposed: " + shape_string(av.shape()) + " times transpose of " +
                         shape_string(bv.shape()) + " has mismatched inner dimensions");
  }
  const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(0);
  Tensor out({m, n});
  kernels::gemm_nt(m, k, n, av.data().data(), bv.data().data(), out.data().data());
  return a.graph().record("matmul_transposed", std::move(out), {a, b}, [a, b, m, k, n](Graph& g, std::size_t self) {
    const double* gout = g.grad(self).data();
    // out = a b^T: da = gout b, db = gout^T a
    if (auto ga = g.accumulator(a); !ga.empty()) {
      kernels::gemm_nn(m, n, k, gout, g.value(b).data().data(), ga.data());
    }
    if (auto gb = g.accumulator(b); !gb.empty()) {
      kernels::gemm_tn(n, m, k, gout, g.value(a).data().data(), gb.data());
    }
  });
}

Var tanh(Var x) {
  // std::tanh rounds to exactly +-1 beyond |v| ~ 19; keep the range open.
  Tensor out = map(x.value(), [](double v) {
    constexpr double bound = 0x1.fffffffffffffp-1;
    return std::clamp(std::tanh(v), -bound, bound);
  });
  return x.graph().record("tanh", std::move(out), {x}, [x](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    const Tensor& y = g.value(self);
    auto gx = g.accumulator(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * (1.0 - y[i] * y[i]);
  });
}

Var gelu(Var x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  Tensor out = map(x.value(), [](double v) { return 0.5 * v * (1.0 + std::erf(v * inv_sqrt2)); });
  return x.graph().record("gelu", std::move(out), {x}, [x](Graph& g, std::size_t self) {
    constexpr double inv_sqrt2pi = 0.39894228040143267794;
    auto gout = g.grad(self);
    const Tensor& xv = g.value(x);
    auto gx = g.accumulator(x);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const double v = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
      gx[i] += gout[i] * (cdf + v * pdf);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  if (!(eps > 0.0)) throw DimensionError("layer_norm: eps must be positive");
  const Tensor& xv = x.value();
  require_last_dim("layer_norm", xv, gamma.value());
  require_last_dim("layer_norm", xv, beta.value());
  const Tensor& gv = gamma.value();
  const Tensor& bv = beta.value();
  const std::size_t d = xv.cols();
  const std::size_t rows = xv.size() / d;

  Tensor out(xv.shape());
  std::vector<double> normalized(xv.size());
  std::vector<double> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data().data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += in[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (in[c] - mu) * (in[c] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (in[c] - mu) * rstd[r];
      normalized[r * d + c] = xhat;
      out[r * d + c] = xhat * gv[c] + bv[c];
    }
  }

  return x.graph().record(
      "layer_norm", std::move(out), {x, gamma, beta},
      [x, gamma, beta, d, rows, normalized = std::move(normalized), rstd = std::move(rstd)](Graph& g, std::size_t self) {
        auto gout = g.grad(self);
        const Tensor& gv = g.value(gamma);
        auto gx = g.accumulator(x);
        auto gg = g.accumulator(gamma);
        auto gb = g.accumulator(beta);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dy = gout.data() + r * d;
          const double* xhat = normalized.data() + r * d;
          if (!gg.empty()) {
            for (std::size_t c = 0; c < d; ++c) gg[c] += dy[c] * xhat[c];
          }
          if (!gb.empty()) {
            for (std::size_t c = 0; c < d; ++c) gb[c] += dy[c];
          }
          if (gx.empty()) continue;
          double mean_dxhat = 0.0;
          double mean_dxhat_xhat = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            const double dxhat = dy[c] * gv[c];
            mean_dxhat += dxhat;
            mean_dxhat_xhat += dxhat * xhat[c];
          }
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          for (std::size_t c = 0; c < d; ++c) {
            const double dxhat = dy[c] * gv[c];
            gx[r * d + c] += rstd[r] * (dxhat - mean_dxhat - xhat[c] * mean_dxhat_xhat);
          }
        }
      });
}

Var softmax(Var x, std::size_t axis) {
  const Tensor& xv = x.value();
  if (axis >= xv.rank()) {
    throw DimensionError("softmax: axis " + std::to_string(axis) + " out of range for " + shape_string(xv.shape()));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= xv.dim(i);
  for (std::size_t i = axis + 1; i < xv.rank(); ++i) inner *= xv.dim(i);
  const std::size_t len = xv.dim(axis);

  Tensor out(xv.shape());
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t in = 0; in < inner; ++in) {
      const std::size_t base = o * len * inner + in;
      double mx = -INFINITY;
      for (std::size_t l = 0; l < len; ++l) mx = std::max(mx, xv[base + l * inner]);
      double total = 0.0;
      for (std::size_t l = 0; l < len; ++l) {
        const double e = std::exp(xv[base + l * inner] - mx);
        out[base + l * inner] = e;
        total += e;
      }
      for (std::size_t l = 0; l < len; ++l) out[base + l * inner] /= total;
    }
  }
  return x.graph().record("softmax", std::move(out), {x}, [x, outer, inner, len](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    const Tensor& y = g.value(self);
    auto gx = g.accumulator(x);
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t in = 0; in < inner; ++in) {
        const std::size_t base = o * len * inner + in;
        double dot = 0.0;
        for (std::size_t l = 0; l < len; ++l) dot += gout[base + l * inner] * y[base + l * inner];
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t i = base + l * inner;
          gx[i] += y[i] * (gout[i] - dot);
        }
      }
    }
  });
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  const Tensor& lv = logits.value();
  require_rank2("cross_entropy", lv);
  const std::size_t batch = lv.dim(0), classes = lv.dim(1);
  if (targets.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(batch) + " rows");
  }
  std::vector<double> probs(lv.size());
  std::vector<int> labels(targets.begin(), targets.end());
  double loss = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= classes) {
      throw DimensionError("cross_entropy: target " + std::to_string(labels[r]) + " out of range");
    }
    const double* z = lv.data().data() + r * classes;
    double mx = -INFINITY;
    for (std::size_t c = 0; c < classes; ++c) mx = std::max(mx, z[c]);
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) total += std::exp(z[c] - mx);
    const double log_total = std::log(total) + mx;
    for (std::size_t c = 0; c < classes; ++c) probs[r * classes + c] = std::exp(z[c] - log_total);
    loss += log_total - z[labels[r]];
  }
  loss /= static_cast<double>(batch);
  return logits.graph().record(
      "cross_entropy", Tensor::scalar(loss), {logits},
      [logits, batch, classes, probs = std::move(probs), labels = std::move(labels)](Graph& g, std::size_t self) {
        const double gout = g.grad(self)[0] / static_cast<double>(batch);
        auto gl = g.accumulator(logits);
        for (std::size_t r = 0; r < batch; ++r) {
          for (std::size_t c = 0; c < classes; ++c) {
            const double onehot = static_cast<int>(c) == labels[r] ? 1.0 : 0.0;
            gl[r * classes + c] += gout * (probs[r * classes + c] - onehot);
          }
        }
      });
}

Var gather_rows(Var table, std::span<const std::int32_t> ids) {
  const Tensor& tv = table.value();
  require_rank2("gather_rows", tv);
  const std::size_t vocab = tv.dim(0), d = tv.dim(1);
  std::vector<std::int32_t> index(ids.begin(), ids.end());
  Tensor out({index.size(), d});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] < 0 || static_cast<std::size_t>(index[r]) >= vocab) {
      throw DimensionError("gather_rows: id " + std::to_string(index[r]) + " outside table of " +
                           std::to_string(vocab) + " rows");
    }
    auto src = tv.row(static_cast<std::size_t>(index[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return table.graph().record("gather_rows", std::move(out), {table},
                              [table, d, index = std::move(index)](Graph& g, std::size_t self) {
                                auto gout = g.grad(self);
                                auto gt = g.accumulator(table);
                                for (std::size_t r = 0; r < index.size(); ++r) {
                                  double* dst = gt.data() + static_cast<std::size_t>(index[r]) * d;
                                  for (std::size_t c = 0; c < d; ++c) dst[c] += gout[r * d + c];
                                }
                              });
}

Var dropout(Var x, double p, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw DimensionError("dropout: probability must lie in [0, 1)");
  if (p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  const Tensor& xv = x.value();
  std::vector<double> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
    out[i] = xv[i] * mask[i];
  }
  return x.graph().record("dropout", std::move(out), {x}, [x, mask = std::move(mask)](Graph& g, std::size_t self) {
    auto gout = g.grad(self);
    auto gx = g.accumulator(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gout[i] * mask[i];
  });
}

}  // namespace gibert::ad
