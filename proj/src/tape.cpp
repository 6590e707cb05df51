// Copyright 2026 The specrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "specrec/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "specrec/dft.hpp"
#include "specrec/errors.hpp"

namespace specrec {

namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

void require(bool ok, const std::string& what) {
  if (!ok) throw InputError(what);
}

Tape& same_tape(Var a, Var b) {
  require(a.tape != nullptr && a.tape == b.tape, "tape: operands recorded on different tapes");
  return *a.tape;
}

}  // namespace

const Matrix& Var::value() const { return tape->value(*this); }

const Matrix& Gradients::of(Var leaf) const {
  for (const auto& p : params)
    if (p.leaf_id == leaf.id) return p.grad;
  throw InputError("gradients: variable " + std::to_string(leaf.id) + " is not a parameter");
}

Var Tape::parameter(Matrix value, std::string name) {
  Node n;
  n.value = std::move(value);
  n.trainable = true;
  n.requires_grad = true;
  n.name = std::move(name);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::vector<Var> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  for (const Var& p : parents) {
    require(p.tape == this, "tape: parent from another tape");
    n.parents.push_back(p.id);
    n.requires_grad = n.requires_grad || nodes_[p.id].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

Gradients Tape::backward(Var loss) {
  require(loss.tape == this, "backward: loss from another tape");
  const Matrix& lv = nodes_[loss.id].value;
  require(lv.rows() == 1 && lv.cols() == 1, "backward: loss must be 1x1, got " + shape(lv));

  std::vector<Matrix> grads(nodes_.size());
  grads[loss.id] = Matrix(1, 1, 1.0);
  std::vector<Matrix*> parent_ptrs;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (grads[i].empty() || !node.requires_grad || !node.backward) continue;
    parent_ptrs.assign(node.parents.size(), nullptr);
    for (std::size_t k = 0; k < node.parents.size(); ++k) {
      const std::size_t pid = node.parents[k];
      if (!nodes_[pid].requires_grad) continue;
      if (grads[pid].empty()) grads[pid] = Matrix(nodes_[pid].value.rows(), nodes_[pid].value.cols());
      parent_ptrs[k] = &grads[pid];
    }
    node.backward(*this, i, grads[i], parent_ptrs);
  }

  Gradients out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].trainable) continue;
    ParamGradient pg{nodes_[i].name, i, {}};
    if (grads[i].empty() || i > loss.id) {
      pg.grad = Matrix(nodes_[i].value.rows(), nodes_[i].value.cols());
      out.unreachable.push_back(nodes_[i].name.empty() ? "#" + std::to_string(i) : nodes_[i].name);
    } else {
      pg.grad = std::move(grads[i]);
    }
    out.params.push_back(std::move(pg));
  }
  return out;
}

// ---------------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require(a.cols() == b.rows(), "matmul: " + shape(a.value()) + " times " + shape(b.value()));
  return t.record(specrec::matmul(a.value(), b.value()), {a, b},
                  [a, b](const Tape& tape, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                    if (g[0]) *g[0] += matmul_nt(up, tape.value(b));
                    if (g[1]) *g[1] += matmul_tn(tape.value(a), up);
                  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: " + shape(a.value()) + " vs " + shape(b.value()));
  return t.record(a.value() + b.value(), {a, b},
                  [](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                    if (g[0]) *g[0] += up;
                    if (g[1]) *g[1] += up;
                  });
}

Var add_row_bias(Var a, Var bias) {
  Tape& t = same_tape(a, bias);
  require(bias.rows() == 1 && bias.cols() == a.cols(),
          "add_row_bias: bias " + shape(bias.value()) + " for " + shape(a.value()));
  Matrix out = a.value();
  const Matrix& b = bias.value();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b(0, c);
  return t.record(std::move(out), {a, bias},
                  [](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                    if (g[0]) *g[0] += up;
                    if (g[1]) {
                      for (std::size_t r = 0; r < up.rows(); ++r)
                        for (std::size_t c = 0; c < up.cols(); ++c) (*g[1])(0, c) += up(r, c);
                    }
                  });
}

Var scale(Var a, double s) {
  return a.tape->record(s * a.value(), {a},
                        [s](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (g[0]) *g[0] += s * up;
                        });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard: shape mismatch");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
  return t.record(std::move(out), {a, b},
                  [a, b](const Tape& tape, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                    const auto& av = tape.value(a).data();
                    const auto& bv = tape.value(b).data();
                    for (std::size_t i = 0; i < up.size(); ++i) {
                      if (g[0]) g[0]->data()[i] += up.data()[i] * bv[i];
                      if (g[1]) g[1]->data()[i] += up.data()[i] * av[i];
                    }
                  });
}

Var transpose(Var a) {
  return a.tape->record(a.value().transpose(), {a},
                        [](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (g[0]) *g[0] += up.transpose();
                        });
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_derivative(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

Var activation(Var a, Activation kind) {
  if (kind == Activation::kIdentity) {
    return a.tape->record(a.value(), {a}, [](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
      if (g[0]) *g[0] += up;
    });
  }
  Matrix out = a.value();
  for (double& v : out.data()) v = gelu(v);
  return a.tape->record(std::move(out), {a},
                        [a](const Tape& tape, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          const auto& x = tape.value(a).data();
                          for (std::size_t i = 0; i < up.size(); ++i) g[0]->data()[i] += up.data()[i] * gelu_derivative(x[i]);
                        });
}

Var softmax_rows(Var a, bool causal) {
  const Matrix& x = a.value();
  require(!causal || x.rows() <= x.cols(), "softmax_rows: causal mask needs cols >= rows");
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const std::size_t width = causal ? r + 1 : x.cols();
    double mx = -INFINITY;
    for (std::size_t c = 0; c < width; ++c) mx = std::max(mx, x(r, c));
    double sum = 0.0;
    for (std::size_t c = 0; c < width; ++c) {
      y(r, c) = std::exp(x(r, c) - mx);
      sum += y(r, c);
    }
    for (std::size_t c = 0; c < width; ++c) y(r, c) /= sum;
  }
  return a.tape->record(std::move(y), {a},
                        [](const Tape& tape, std::size_t self, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          const Matrix& y = tape.value(Var{nullptr, self});
                          for (std::size_t r = 0; r < y.rows(); ++r) {
                            const double inner = dot(up.row(r), y.row(r));
                            for (std::size_t c = 0; c < y.cols(); ++c) (*g[0])(r, c) += y(r, c) * (up(r, c) - inner);
                          }
                        });
}

Var layer_norm_rows(Var a, Var gamma, Var beta, double eps) {
  Tape& t = same_tape(a, gamma);
  same_tape(a, beta);
  const Matrix& x = a.value();
  const std::size_t d = x.cols();
  require(gamma.rows() == 1 && gamma.cols() == d && beta.rows() == 1 && beta.cols() == d,
          "layer_norm_rows: gamma/beta must be 1x" + std::to_string(d));
  Matrix xhat(x.rows(), d);
  std::vector<double> inv_std(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mu = 0.0;
    for (double v : x.row(r)) mu += v;
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (double v : x.row(r)) var += (v - mu) * (v - mu);
    var /= static_cast<double>(d);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) xhat(r, c) = (x(r, c) - mu) * inv_std[r];
  }
  Matrix y(x.rows(), d);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < d; ++c) y(r, c) = gamma.value()(0, c) * xhat(r, c) + beta.value()(0, c);
  return t.record(std::move(y), {a, gamma, beta},
                  [gamma, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                      const Tape& tape, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                    const Matrix& gm = tape.value(gamma);
                    const std::size_t d = up.cols();
                    for (std::size_t r = 0; r < up.rows(); ++r) {
                      if (g[0]) {
                        double mean_dxhat = 0.0;
                        double mean_dxhat_xhat = 0.0;
                        for (std::size_t c = 0; c < d; ++c) {
                          const double dxh = up(r, c) * gm(0, c);
                          mean_dxhat += dxh;
                          mean_dxhat_xhat += dxh * xhat(r, c);
                        }
                        mean_dxhat /= static_cast<double>(d);
                        mean_dxhat_xhat /= static_cast<double>(d);
                        for (std::size_t c = 0; c < d; ++c) {
                          const double dxh = up(r, c) * gm(0, c);
                          (*g[0])(r, c) += inv_std[r] * (dxh - mean_dxhat - xhat(r, c) * mean_dxhat_xhat);
                        }
                      }
                      for (std::size_t c = 0; c < d; ++c) {
                        if (g[1]) (*g[1])(0, c) += up(r, c) * xhat(r, c);
                        if (g[2]) (*g[2])(0, c) += up(r, c);
                      }
                    }
                  });
}

Var slice_cols(Var a, std::size_t start, std::size_t count) {
  const Matrix& x = a.value();
  require(start + count <= x.cols(), "slice_cols: range past " + std::to_string(x.cols()) + " columns");
  Matrix y(x.rows(), count);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) y(r, c) = x(r, start + c);
  return a.tape->record(std::move(y), {a},
                        [start](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          for (std::size_t r = 0; r < up.rows(); ++r)
                            for (std::size_t c = 0; c < up.cols(); ++c) (*g[0])(r, start + c) += up(r, c);
                        });
}

Var slice_rows(Var a, std::size_t start, std::size_t count) {
  const Matrix& x = a.value();
  require(start + count <= x.rows(), "slice_rows: range past " + std::to_string(x.rows()) + " rows");
  Matrix y(count, x.cols());
  for (std::size_t r = 0; r < count; ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) = x(start + r, c);
  return a.tape->record(std::move(y), {a},
                        [start](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          for (std::size_t r = 0; r < up.rows(); ++r)
                            for (std::size_t c = 0; c < up.cols(); ++c) (*g[0])(start + r, c) += up(r, c);
                        });
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require(p.rows() == rows, "concat_cols: row counts differ");
    same_tape(parts[0], p);
    cols += p.cols();
  }
  Matrix y(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const Var& p : parts) {
    offsets.push_back(off);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < p.cols(); ++c) y(r, off + c) = p.value()(r, c);
    off += p.cols();
  }
  return parts[0].tape->record(
      std::move(y), std::vector<Var>(parts.begin(), parts.end()),
      [offsets](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (!g[k]) continue;
          for (std::size_t r = 0; r < g[k]->rows(); ++r)
            for (std::size_t c = 0; c < g[k]->cols(); ++c) (*g[k])(r, c) += up(r, offsets[k] + c);
        }
      });
}

Var concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no parts");
  const std::size_t cols = parts[0].cols();
  std::vector<double> data;
  std::vector<std::size_t> offsets;
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require(p.cols() == cols, "concat_rows: column counts differ");
    same_tape(parts[0], p);
    offsets.push_back(rows);
    rows += p.rows();
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  return parts[0].tape->record(
      Matrix(rows, cols, std::move(data)), std::vector<Var>(parts.begin(), parts.end()),
      [offsets](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
        for (std::size_t k = 0; k < g.size(); ++k) {
          if (!g[k]) continue;
          for (std::size_t r = 0; r < g[k]->rows(); ++r)
            for (std::size_t c = 0; c < g[k]->cols(); ++c) (*g[k])(r, c) += up(offsets[k] + r, c);
        }
      });
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Matrix& x = a.value();
  Matrix y(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < x.rows(), "gather_rows: row " + std::to_string(rows[i]) + " out of range");
    for (std::size_t c = 0; c < x.cols(); ++c) y(i, c) = x(rows[i], c);
  }
  return a.tape->record(std::move(y), {a},
                        [idx = std::vector<std::size_t>(rows.begin(), rows.end())](
                            const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          for (std::size_t i = 0; i < idx.size(); ++i)
                            for (std::size_t c = 0; c < up.cols(); ++c) (*g[0])(idx[i], c) += up(i, c);
                        });
}

Var row_sums(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (double v : x.row(r)) y(r, 0) += v;
  return a.tape->record(std::move(y), {a},
                        [](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (!g[0]) return;
                          for (std::size_t r = 0; r < g[0]->rows(); ++r)
                            for (std::size_t c = 0; c < g[0]->cols(); ++c) (*g[0])(r, c) += up(r, 0);
                        });
}

Var sum_squares(Var a) {
  return a.tape->record(Matrix(1, 1, squared_norm(a.value())), {a},
                        [a](const Tape& tape, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (g[0]) *g[0] += (2.0 * up(0, 0)) * tape.value(a);
                        });
}

Var spectral_filter(Var a, std::span<const double> gains) {
  std::vector<double> gv(gains.begin(), gains.end());
  Matrix y = filter_columns(a.value(), gv);
  return a.tape->record(std::move(y), {a},
                        [gv = std::move(gv)](const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
                          if (g[0]) *g[0] += filter_columns(up, gv);
                        });
}

Var softmax_cross_entropy(Var logits, std::span<const std::size_t> targets) {
  const Matrix& x = logits.value();
  require(targets.size() == x.rows(), "softmax_cross_entropy: one target per row required");
  require(x.rows() > 0, "softmax_cross_entropy: no rows");
  Matrix probs(x.rows(), x.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    require(targets[r] < x.cols(), "softmax_cross_entropy: target out of range");
    double mx = -INFINITY;
    for (double v : x.row(r)) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t c = 0; c < x.cols(); ++c) {
      probs(r, c) = std::exp(x(r, c) - mx);
      sum += probs(r, c);
    }
    for (std::size_t c = 0; c < x.cols(); ++c) probs(r, c) /= sum;
    loss += std::log(sum) + mx - x(r, targets[r]);
  }
  const double n = static_cast<double>(x.rows());
  return logits.tape->record(
      Matrix(1, 1, loss / n), {logits},
      [probs = std::move(probs), tg = std::vector<std::size_t>(targets.begin(), targets.end()), n](
          const Tape&, std::size_t, const Matrix& up, std::span<Matrix* const> g) {
        if (!g[0]) return;
        const double s = up(0, 0) / n;
        for (std::size_t r = 0; r < probs.rows(); ++r)
          for (std::size_t c = 0; c < probs.cols(); ++c)
            (*g[0])(r, c) += s * (probs(r, c) - (c == tg[r] ? 1.0 : 0.0));
      });
}

// ---------------------------------------------------------------------------

FiniteDifferenceReport finite_difference_check(const LossFn& loss, const std::vector<Matrix>& params,
                                               const std::vector<Matrix>& analytic,
                                               const std::vector<std::string>& names, double step) {
  require(params.size() == analytic.size(), "finite_difference_check: parameter/gradient count mismatch");
  require(step > 0.0, "finite_difference_check: step must be positive");
  const double base_a = loss(params);
  const double base_b = loss(params);
  if (base_a != base_b) {
    throw ProtocolError("finite_difference_check: loss is not deterministic (" + std::to_string(base_a) + " vs " +
                        std::to_string(base_b) + ")");
  }
  FiniteDifferenceReport report;
  std::vector<Matrix> work = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const Matrix& g = analytic[p];
    require(g.rows() == params[p].rows() && g.cols() == params[p].cols(),
            "finite_difference_check: gradient shape mismatch for parameter " + std::to_string(p));
    Matrix fd(g.rows(), g.cols());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      const double orig = work[p].data()[i];
      work[p].data()[i] = orig + step;
      const double up = loss(work);
      work[p].data()[i] = orig - step;
      const double down = loss(work);
      work[p].data()[i] = orig;
      fd.data()[i] = (up - down) / (2.0 * step);
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < fd.size(); ++i) scale = std::max({scale, std::abs(g.data()[i]), std::abs(fd.data()[i])});
    FiniteDifferenceEntry entry{p < names.size() ? names[p] : "#" + std::to_string(p), 0.0, 0, 0};
    if (scale > 0.0) {
      for (std::size_t i = 0; i < fd.size(); ++i) {
        const double a = g.data()[i];
        const double b = fd.data()[i];
        const double denom = std::max({std::abs(a), std::abs(b), 1e-3 * scale});
        const double err = std::abs(a - b) / denom;
        if (err > entry.max_relative_error) {
          entry.max_relative_error = err;
          entry.row = i / std::max<std::size_t>(fd.cols(), 1);
          entry.col = i % std::max<std::size_t>(fd.cols(), 1);
        }
      }
    }
    if (entry.max_relative_error >= report.worst) {
      report.worst = entry.max_relative_error;
      report.worst_param = entry.name;
    }
    report.per_param.push_back(std::move(entry));
  }
  return report;
}

}  // namespace specrec
