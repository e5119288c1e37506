#include <cmath>
#include <string>

#include "gibert/error.hpp"
#include "gibert/ops.hpp"

namespace gibert::ad {
namespace {

struct AttentionDims {
  std::size_t batch, query_len, key_len, heads, qk_dim, v_dim, qk_head, v_head;
  double scale;
};

AttentionDims check_layout(const Tensor& q, const Tensor& k, const Tensor* v, const AttentionLayout& layout) {
  auto fail = [&](const std::string& why) {
    throw DimensionError("scaled_dot_attention: " + why + " (q " + shape_string(q.shape()) + ", k " +
                         shape_string(k.shape()) + (v ? ", v " + shape_string(v->shape()) : std::string()) + ")");
  };
  if (q.rank() != 2 || k.rank() != 2 || (v && v->rank() != 2)) fail("inputs must be matrices");
  if (layout.heads == 0 || layout.batch == 0) fail("batch and heads must be positive");
  if (q.dim(0) != layout.batch * layout.query_len) fail("query rows do not match batch * query_len");
  if (k.dim(0) != layout.batch * layout.key_len) fail("key rows do not match batch * key_len");
  if (v && v->dim(0) != k.dim(0)) fail("keys and values differ in row count");
  if (q.dim(1) != k.dim(1)) fail("queries and keys differ in width");
  if (q.dim(1) % layout.heads != 0) fail("query width not divisible by head count");
  if (v && v->dim(1) % layout.heads != 0) fail("value width not divisible by head count");
  if (!layout.key_mask.empty() && layout.key_mask.size() != k.dim(0)) fail("key mask length does not match key rows");
  AttentionDims d{};
  d.batch = layout.batch;
  d.query_len = layout.query_len;
  d.key_len = layout.key_len;
  d.heads = layout.heads;
  d.qk_dim = q.dim(1);
  d.v_dim = v ? v->dim(1) : 0;
  d.qk_head = d.qk_dim / d.heads;
  d.v_head = d.v_dim / d.heads;
  d.scale = 1.0 / std::sqrt(static_cast<double>(d.qk_head));
  return d;
}

// probs is [batch, heads, query_len, key_len].
void compute_probs(const Tensor& q, const Tensor& k, const AttentionDims& d, std::span<const std::uint8_t> mask,
                   std::vector<double>& probs) {
  probs.assign(d.batch * d.heads * d.query_len * d.key_len, 0.0);
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t h = 0; h < d.heads; ++h) {
      for (std::size_t i = 0; i < d.query_len; ++i) {
        const double* qi = q.data().data() + (b * d.query_len + i) * d.qk_dim + h * d.qk_head;
        double* row = probs.data() + ((b * d.heads + h) * d.query_len + i) * d.key_len;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < d.key_len; ++j) {
          const std::size_t key_row = b * d.key_len + j;
          const double* kj = k.data().data() + key_row * d.qk_dim + h * d.qk_head;
          double s = 0.0;
          for (std::size_t c = 0; c < d.qk_head; ++c) s += qi[c] * kj[c];
          s *= d.scale;
          if (!mask.empty() && mask[key_row] == 0) s += kMaskedLogit;
          row[j] = s;
          mx = std::max(mx, s);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < d.key_len; ++j) {
          row[j] = std::exp(row[j] - mx);
          total += row[j];
        }
        for (std::size_t j = 0; j < d.key_len; ++j) row[j] /= total;
      }
    }
  }
}

}  // namespace

Tensor attention_weights(const Tensor& q, const Tensor& k, const AttentionLayout& layout) {
  const AttentionDims d = check_layout(q, k, nullptr, layout);
  std::vector<double> probs;
  compute_probs(q, k, d, layout.key_mask, probs);
  return Tensor({d.batch * d.heads * d.query_len, d.key_len}, std::move(probs));
}

Var scaled_dot_attention(Var q, Var k, Var v, const AttentionLayout& layout) {
  const Tensor& qv = q.value();
  const Tensor& kv = k.value();
  const Tensor& vv = v.value();
  const AttentionDims d = check_layout(qv, kv, &vv, layout);

  std::vector<double> probs;
  compute_probs(qv, kv, d, layout.key_mask, probs);

  Tensor out({d.batch * d.query_len, d.v_dim});
  for (std::size_t b = 0; b < d.batch; ++b) {
    for (std::size_t h = 0; h < d.heads; ++h) {
      for (std::size_t i = 0; i < d.query_len; ++i) {
        const double* p = probs.data() + ((b * d.heads + h) * d.query_len + i) * d.key_len;
        double* o = out.data().data() + (b * d.query_len + i) * d.v_dim + h * d.v_head;
        for (std::size_t j = 0; j < d.key_len; ++j) {
          const double* vj = vv.data().data() + (b * d.key_len + j) * d.v_dim + h * d.v_head;
          for (std::size_t c = 0; c < d.v_head; ++c) o[c] += p[j] * vj[c];
        }
      }
    }
  }

  return q.graph().record(
      "scaled_dot_attention", std::move(out), {q, k, v},
      [q, k, v, d, probs = std::move(probs)](Graph& g, std::size_t self) {
        auto gout = g.grad(self);
        const Tensor& qv = g.value(q);
        const Tensor& kv = g.value(k);
        const Tensor& vv = g.value(v);
        auto gq = g.accumulator(q);
        auto gk = g.accumulator(k);
        auto gv = g.accumulator(v);
        std::vector<double> dscore(d.key_len);
        for (std::size_t b = 0; b < d.batch; ++b) {
          for (std::size_t h = 0; h < d.heads; ++h) {
            for (std::size_t i = 0; i < d.query_len; ++i) {
              const double* p = probs.data() + ((b * d.heads + h) * d.query_len + i) * d.key_len;
              const double* go = gout.data() + (b * d.query_len + i) * d.v_dim + h * d.v_head;
              double weighted = 0.0;
              for (std::size_t j = 0; j < d.key_len; ++j) {
                const std::size_t key_row = b * d.key_len + j;
                const double* vj = vv.data().data() + key_row * d.v_dim + h * d.v_head;
                double dp = 0.0;
                for (std::size_t c = 0; c < d.v_head; ++c) dp += go[c] * vj[c];
                dscore[j] = dp;
                weighted += dp * p[j];
                if (!gv.empty()) {
                  double* gvj = gv.data() + key_row * d.v_dim + h * d.v_head;
                  for (std::size_t c = 0; c < d.v_head; ++c) gvj[c] += p[j] * go[c];
                }
              }
              const std::size_t query_row = b * d.query_len + i;
              const double* qi = qv.data().data() + query_row * d.qk_dim + h * d.qk_head;
              for (std::size_t j = 0; j < d.key_len; ++j) {
                const double ds = p[j] * (dscore[j] - weighted) * d.scale;
                if (ds == 0.0) continue;
                const std::size_t key_row = b * d.key_len + j;
                const double* kj = kv.data().data() + key_row * d.qk_dim + h * d.qk_head;
                if (!gq.empty()) {
                  double* gqi = gq.data() + query_row * d.qk_dim + h * d.qk_head;
                  for (std::size_t c = 0; c < d.qk_head; ++c) gqi[c] += ds * kj[c];
                }
                if (!gk.empty()) {
                  double* gkj = gk.data() + key_row * d.qk_dim + h * d.qk_head;
                  for (std::size_t c = 0; c < d.qk_head; ++c) gkj[c] += ds * qi[c];
                }
              }
            }
          }
        }
      });
}

}  // namespace gibert::ad
