#include "asrk/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>

#include "asrk/errors.hpp"
#include "asrk/tensor/kernels.hpp"

namespace asrk::tensor {
namespace {

using detail::Node;
using BackwardFn = std::function<void(Node&)>;

const kernels::KernelTable& K() { return kernels::active(); }

Tensor make_op(Shape shape, std::vector<double> values, std::initializer_list<Tensor> inputs,
               BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  Tape* tape = active_tape();
  const bool needs_grad =
      tape != nullptr &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (needs_grad) {
    node->requires_grad = true;
    for (const Tensor& t : inputs) node->inputs.push_back(t.handle());
    node->backward = std::move(backward);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

Tensor make_op_n(Shape shape, std::vector<double> values, std::span<const Tensor> inputs,
                 BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  Tape* tape = active_tape();
  const bool needs_grad =
      tape != nullptr &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (needs_grad) {
    node->requires_grad = true;
    for (const Tensor& t : inputs) node->inputs.push_back(t.handle());
    node->backward = std::move(backward);
    tape->record(node);
  }
  return Tensor(std::move(node));
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorKind::dimension, std::string(op) + ": incompatible shapes " +
                                        to_string(a.shape()) + " and " + to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw Error(ErrorKind::dimension, std::string(op) + ": expected rank " + std::to_string(rank) +
                                          ", got " + to_string(a.shape()));
  }
}

std::size_t resolve_axis(const Tensor& x, int axis) {
  const int r = static_cast<int>(x.rank());
  const int resolved = axis < 0 ? axis + r : axis;
  if (resolved < 0 || resolved >= r) {
    throw Error(ErrorKind::dimension,
                "axis " + std::to_string(axis) + " out of range for " + to_string(x.shape()));
  }
  return static_cast<std::size_t>(resolved);
}

// Splits a shape around `axis` into (outer, n, inner) extents.
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisView axis_view(const Shape& shape, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

std::vector<double> transposed(std::span<const double> v, std::size_t rows, std::size_t cols) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = v[i * cols + j];
  return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) shape_error("matmul", a, b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  K().gemm(a.data().data(), b.data().data(), out.data(), m, k, n);
  return make_op({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const double* g = self.grad.data();
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) {
      const std::vector<double> bt = transposed(bn.value, k, n);
      K().gemm(g, bt.data(), an.ensure_grad().data(), m, n, k);
    }
    if (bn.requires_grad) K().gemm_tn(an.value.data(), g, bn.ensure_grad().data(), m, k, n);
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t r = a.dim(0), c = a.dim(1);
  return make_op({c, r}, transposed(a.data(), r, c), {a}, [r, c](Node& self) {
    Node& in = *self.inputs[0];
    const std::vector<double> back = transposed(self.grad, c, r);
    K().axpy(back.size(), 1.0, back.data(), in.ensure_grad().data());
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("add", a, b);
  std::vector<double> out(a.size());
  K().add(out.size(), a.data().data(), b.data().data(), out.data());
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (auto& in : self.inputs) {
      if (in->requires_grad) K().axpy(self.grad.size(), 1.0, self.grad.data(), in->ensure_grad().data());
    }
  });
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  if (a.rank() != 2 || bias.rank() != 1 || a.dim(1) != bias.dim(0)) shape_error("add_row", a, bias);
  const std::size_t m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    K().add(n, a.data().data() + i * n, bias.data().data(), out.data() + i * n);
  return make_op(a.shape(), std::move(out), {a, bias}, [m, n](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) K().axpy(m * n, 1.0, self.grad.data(), an.ensure_grad().data());
    if (bn.requires_grad) {
      double* gb = bn.ensure_grad().data();
      for (std::size_t i = 0; i < m; ++i) K().axpy(n, 1.0, self.grad.data() + i * n, gb);
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_error("mul", a, b);
  std::vector<double> out(a.size());
  K().mul(out.size(), a.data().data(), b.data().data(), out.data());
  return make_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    const std::size_t n = self.grad.size();
    if (an.requires_grad) K().mul_acc(n, self.grad.data(), bn.value.data(), an.ensure_grad().data());
    if (bn.requires_grad) K().mul_acc(n, self.grad.data(), an.value.data(), bn.ensure_grad().data());
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.data().begin(), a.data().end());
  for (double& v : out) v *= factor;
  return make_op(a.shape(), std::move(out), {a}, [factor](Node& self) {
    Node& in = *self.inputs[0];
    K().axpy(self.grad.size(), factor, self.grad.data(), in.ensure_grad().data());
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.size());
  std::transform(x.data().begin(), x.data().end(), out.begin(), [](double v) { return std::tanh(v); });
  return make_op(x.shape(), std::move(out), {x}, [](Node& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

Tensor gelu(const Tensor& x) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  std::vector<double> out(x.size());
  std::transform(x.data().begin(), x.data().end(), out.begin(),
                 [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  return make_op(x.shape(), std::move(out), {x}, [](Node& self) {
    constexpr double kInvSqrt2Pi = 0.39894228040143267794;
    Node& in = *self.inputs[0];
    auto& g = in.ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = in.value[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      g[i] += self.grad[i] * (cdf + v * pdf);
    }
  });
}

Tensor softmax(const Tensor& x, int axis) {
  const std::size_t ax = resolve_axis(x, axis);
  const AxisView v = axis_view(x.shape(), ax);
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t i = 0; i < v.inner; ++i) {
      const std::size_t base = o * v.n * v.inner + i;
      double mx = in[base];
      for (std::size_t j = 1; j < v.n; ++j) mx = std::max(mx, in[base + j * v.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < v.n; ++j) {
        const double e = std::exp(in[base + j * v.inner] - mx);
        out[base + j * v.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < v.n; ++j) out[base + j * v.inner] /= total;
    }
  }
  return make_op(x.shape(), std::move(out), {x}, [v](Node& self) {
    auto& g = self.inputs[0]->ensure_grad();
    const auto& y = self.value;
    const auto& gy = self.grad;
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t i = 0; i < v.inner; ++i) {
        const std::size_t base = o * v.n * v.inner + i;
        double dot = 0.0;
        for (std::size_t j = 0; j < v.n; ++j) dot += gy[base + j * v.inner] * y[base + j * v.inner];
        for (std::size_t j = 0; j < v.n; ++j) {
          const std::size_t idx = base + j * v.inner;
          g[idx] += y[idx] * (gy[idx] - dot);
        }
      }
    }
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() > 2) {
    throw Error(ErrorKind::dimension, "cross_entropy: logits must be 1-D or 2-D, got " +
                                          to_string(logits.shape()));
  }
  const std::size_t b = logits.rank() == 2 ? logits.dim(0) : 1;
  const std::size_t n = logits.rank() == 2 ? logits.dim(1) : logits.dim(0);
  if (labels.size() != b) {
    throw Error(ErrorKind::dimension, "cross_entropy: " + std::to_string(labels.size()) +
                                          " labels for " + std::to_string(b) + " rows");
  }
  for (std::size_t r = 0; r < b; ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= n) {
      throw Error(ErrorKind::label, "cross_entropy: label " + std::to_string(labels[r]) + " at row " +
                                        std::to_string(r) + " outside [0, " + std::to_string(n) + ")");
    }
  }
  const auto x = logits.data();
  std::vector<double> probs(x.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < b; ++r) {
    const double* row_in = x.data() + r * n;
    double* row_p = probs.data() + r * n;
    const double mx = *std::max_element(row_in, row_in + n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row_p[j] = std::exp(row_in[j] - mx);
      total += row_p[j];
    }
    for (std::size_t j = 0; j < n; ++j) row_p[j] /= total;
    const double lse = mx + std::log(total);
    loss += lse - row_in[labels[r]];
  }
  loss /= static_cast<double>(b);
  std::vector<int> saved(labels.begin(), labels.end());
  return make_op({1}, {loss}, {logits},
                 [probs = std::move(probs), saved = std::move(saved), b, n](Node& self) {
                   auto& g = self.inputs[0]->ensure_grad();
                   const double upstream = self.grad[0] / static_cast<double>(b);
                   for (std::size_t r = 0; r < b; ++r) {
                     for (std::size_t j = 0; j < n; ++j) {
                       const double onehot = static_cast<int>(j) == saved[r] ? 1.0 : 0.0;
                       g[r * n + j] += upstream * (probs[r * n + j] - onehot);
                     }
                   }
                 });
}

Tensor max_pool_rows(const Tensor& x) {
  require_rank("max_pool_rows", x, 2);
  const std::size_t k = x.dim(0), d = x.dim(1);
  const auto in = x.data();
  std::vector<double> out(in.begin(), in.begin() + d);
  for (std::size_t r = 1; r < k; ++r) K().max_update(d, in.data() + r * d, out.data());
  // Lowest row holding the maximum; recomputed so every backend agrees.
  std::vector<std::size_t> argmax(d, 0);
  for (std::size_t c = 0; c < d; ++c) {
    for (std::size_t r = 0; r < k; ++r) {
      if (in[r * d + c] == out[c]) {
        argmax[c] = r;
        break;
      }
    }
  }
  return make_op({d}, std::move(out), {x}, [argmax = std::move(argmax), d](Node& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (std::size_t c = 0; c < d; ++c) g[argmax[c] * d + c] += self.grad[c];
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() != 2 || gamma.rank() != 1 || beta.rank() != 1 || gamma.dim(0) != x.dim(1) ||
      beta.dim(0) != x.dim(1)) {
    throw Error(ErrorKind::dimension, "layer_norm: incompatible shapes " + to_string(x.shape()) +
                                          ", " + to_string(gamma.shape()) + ", " +
                                          to_string(beta.shape()));
  }
  const std::size_t m = x.dim(0), d = x.dim(1);
  const auto in = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  std::vector<double> out(m * d), xhat(m * d), inv_std(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double* row_in = in.data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += row_in[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row_in[c] - mu) * (row_in[c] - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      const double h = (row_in[c] - mu) * inv_std[r];
      xhat[r * d + c] = h;
      out[r * d + c] = h * gv[c] + bv[c];
    }
  }
  return make_op(x.shape(), std::move(out), {x, gamma, beta},
                 [xhat = std::move(xhat), inv_std = std::move(inv_std), m, d](Node& self) {
                   Node& xn = *self.inputs[0];
                   Node& gn = *self.inputs[1];
                   Node& bn = *self.inputs[2];
                   const auto& gy = self.grad;
                   if (gn.requires_grad) {
                     double* gg = gn.ensure_grad().data();
                     for (std::size_t r = 0; r < m; ++r)
                       K().mul_acc(d, gy.data() + r * d, xhat.data() + r * d, gg);
                   }
                   if (bn.requires_grad) {
                     double* gb = bn.ensure_grad().data();
                     for (std::size_t r = 0; r < m; ++r) K().axpy(d, 1.0, gy.data() + r * d, gb);
                   }
                   if (!xn.requires_grad) return;
                   auto& gx = xn.ensure_grad();
                   const auto& gamma_v = gn.value;
                   const double inv_d = 1.0 / static_cast<double>(d);
                   for (std::size_t r = 0; r < m; ++r) {
                     double mean_dh = 0.0, mean_dh_h = 0.0;
                     for (std::size_t c = 0; c < d; ++c) {
                       const double dh = gy[r * d + c] * gamma_v[c];
                       mean_dh += dh;
                       mean_dh_h += dh * xhat[r * d + c];
                     }
                     mean_dh *= inv_d;
                     mean_dh_h *= inv_d;
                     for (std::size_t c = 0; c < d; ++c) {
                       const double dh = gy[r * d + c] * gamma_v[c];
                       gx[r * d + c] += inv_std[r] * (dh - mean_dh - xhat[r * d + c] * mean_dh_h);
                     }
                   }
                 });
}

Tensor embedding_lookup(const Tensor& table, std::span<const int> ids) {
  require_rank("embedding_lookup", table, 2);
  if (ids.empty()) throw Error(ErrorKind::dimension, "embedding_lookup: no ids");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw Error(ErrorKind::vocabulary, "token id " + std::to_string(ids[i]) + " at position " +
                                             std::to_string(i) + " outside vocabulary of size " +
                                             std::to_string(vocab));
    }
  }
  const auto tv = table.data();
  std::vector<double> out(ids.size() * d);
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy_n(tv.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  std::vector<int> saved(ids.begin(), ids.end());
  return make_op({ids.size(), d}, std::move(out), {table}, [saved = std::move(saved), d](Node& self) {
    double* g = self.inputs[0]->ensure_grad().data();
    for (std::size_t i = 0; i < saved.size(); ++i)
      K().axpy(d, 1.0, self.grad.data() + i * d, g + static_cast<std::size_t>(saved[i]) * d);
  });
}

Tensor concat(std::span<const Tensor> parts, int axis) {
  if (parts.empty()) throw Error(ErrorKind::dimension, "concat: no inputs");
  const std::size_t rank = parts[0].rank();
  if (rank > 2) throw Error(ErrorKind::dimension, "concat: rank > 2 unsupported");
  const std::size_t ax = resolve_axis(parts[0], axis);
  for (const Tensor& p : parts) {
    if (p.rank() != rank) shape_error("concat", parts[0], p);
    if (rank == 2 && p.dim(1 - ax) != parts[0].dim(1 - ax)) shape_error("concat", parts[0], p);
  }
  if (rank == 1 || ax == 0) {
    // Row-major: axis-0 concatenation is plain value concatenation.
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    std::size_t lead = 0;
    for (const Tensor& p : parts) {
      offsets.push_back(out.size());
      out.insert(out.end(), p.data().begin(), p.data().end());
      lead += p.dim(0);
    }
    Shape shape = rank == 1 ? Shape{lead} : Shape{lead, parts[0].dim(1)};
    return make_op_n(std::move(shape), std::move(out), parts, [offsets](Node& self) {
      for (std::size_t i = 0; i < self.inputs.size(); ++i) {
        Node& in = *self.inputs[i];
        if (!in.requires_grad) continue;
        K().axpy(in.value.size(), 1.0, self.grad.data() + offsets[i], in.ensure_grad().data());
      }
    });
  }
  const std::size_t rows = parts[0].dim(0);
  std::vector<std::size_t> col_offsets;
  std::size_t cols = 0;
  for (const Tensor& p : parts) {
    col_offsets.push_back(cols);
    cols += p.dim(1);
  }
  std::vector<double> out(rows * cols);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::size_t w = parts[i].dim(1);
    const auto v = parts[i].data();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(v.data() + r * w, w, out.data() + r * cols + col_offsets[i]);
  }
  return make_op_n({rows, cols}, std::move(out), parts, [col_offsets, rows, cols](Node& self) {
    for (std::size_t i = 0; i < self.inputs.size(); ++i) {
      Node& in = *self.inputs[i];
      if (!in.requires_grad) continue;
      const std::size_t w = in.shape[1];
      double* g = in.ensure_grad().data();
      for (std::size_t r = 0; r < rows; ++r)
        K().axpy(w, 1.0, self.grad.data() + r * cols + col_offsets[i], g + r * w);
    }
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw Error(ErrorKind::dimension, "stack_rows: no inputs");
  for (const Tensor& r : rows) {
    if (r.rank() != 1 || r.dim(0) != rows[0].dim(0)) shape_error("stack_rows", rows[0], r);
  }
  const Tensor joined = concat(rows, 0);
  return reshape(joined, {rows.size(), rows[0].dim(0)});
}

Tensor dropout(const Tensor& x, double rate, std::uint64_t seed, bool training) {
  if (rate < 0.0 || rate >= 1.0) {
    throw Error(ErrorKind::config, "dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double u = static_cast<double>(splitmix64(seed ^ splitmix64(i)) >> 11) * 0x1.0p-53;
    mask[i] = u >= rate ? keep_scale : 0.0;
  }
  std::vector<double> out(x.size());
  K().mul(out.size(), x.data().data(), mask.data(), out.data());
  return make_op(x.shape(), std::move(out), {x}, [mask = std::move(mask)](Node& self) {
    K().mul_acc(mask.size(), self.grad.data(), mask.data(), self.inputs[0]->ensure_grad().data());
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank("slice_cols", a, 2);
  const std::size_t rows = a.dim(0), cols = a.dim(1);
  if (begin >= end || end > cols) {
    throw Error(ErrorKind::dimension, "slice_cols: [" + std::to_string(begin) + ", " +
                                          std::to_string(end) + ") invalid for " + to_string(a.shape()));
  }
  const std::size_t w = end - begin;
  std::vector<double> out(rows * w);
  const auto v = a.data();
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(v.data() + r * cols + begin, w, out.data() + r * w);
  return make_op({rows, w}, std::move(out), {a}, [rows, cols, begin, w](Node& self) {
    double* g = self.inputs[0]->ensure_grad().data();
    for (std::size_t r = 0; r < rows; ++r) K().axpy(w, 1.0, self.grad.data() + r * w, g + r * cols + begin);
  });
}

Tensor row(const Tensor& a, std::size_t index) {
  require_rank("row", a, 2);
  const std::size_t cols = a.dim(1);
  if (index >= a.dim(0)) {
    throw Error(ErrorKind::dimension, "row " + std::to_string(index) + " out of range for " +
                                          to_string(a.shape()));
  }
  const auto v = a.data();
  std::vector<double> out(v.begin() + index * cols, v.begin() + (index + 1) * cols);
  return make_op({cols}, std::move(out), {a}, [index, cols](Node& self) {
    K().axpy(cols, 1.0, self.grad.data(), self.inputs[0]->ensure_grad().data() + index * cols);
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (element_count(shape) != a.size()) {
    throw Error(ErrorKind::dimension, "reshape: " + to_string(a.shape()) + " into " + to_string(shape));
  }
  std::vector<double> out(a.data().begin(), a.data().end());
  return make_op(std::move(shape), std::move(out), {a}, [](Node& self) {
    K().axpy(self.grad.size(), 1.0, self.grad.data(), self.inputs[0]->ensure_grad().data());
  });
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return make_op({1}, {total}, {a}, [](Node& self) {
    auto& g = self.inputs[0]->ensure_grad();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

}  // namespace asrk::tensor
