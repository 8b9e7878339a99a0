#include "hkg/tensor.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace hkg::ad {

namespace {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

ConstMatMap map(const Tensor& t) { return {t.data.data(), t.rows, t.cols}; }
MatMap map(Tensor& t) { return {t.data.data(), t.rows, t.cols}; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() +
                     " vs " + b.shape_str());
}

}  // namespace

VarId Tape::emit(Tensor value, std::vector<VarId> parents,
                 std::function<void(Tape&, const Node&)> backprop) {
  Node n;
  n.grad = Tensor(value.rows, value.cols);
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size() - 1);
}

VarId Tape::input(Tensor value) { return emit(std::move(value), {}, nullptr); }
VarId Tape::param(Tensor value) { return emit(std::move(value), {}, nullptr); }

VarId Tape::matmul(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols != tb.rows)
    throw ShapeError("matmul: " + ta.shape_str() + " x " + tb.shape_str());
  Tensor out(ta.rows, tb.cols);
  map(out) = map(ta) * map(tb);
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    map(t.grad_mut(a)) += map(n.grad) * map(t.value(b)).transpose();
    map(t.grad_mut(b)) += map(t.value(a)).transpose() * map(n.grad);
  });
}

VarId Tape::matmul_nt(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.cols != tb.cols)
    throw ShapeError("matmul_nt: " + ta.shape_str() + " x " + tb.shape_str() + "^T");
  Tensor out(ta.rows, tb.rows);
  map(out) = map(ta) * map(tb).transpose();
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    map(t.grad_mut(a)) += map(n.grad) * map(t.value(b));
    map(t.grad_mut(b)) += map(n.grad).transpose() * map(t.value(a));
  });
}

VarId Tape::add(VarId a, VarId b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = value(a);
  map(out) += map(value(b));
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    map(t.grad_mut(a)) += map(n.grad);
    map(t.grad_mut(b)) += map(n.grad);
  });
}

VarId Tape::sub(VarId a, VarId b) {
  require_same_shape(value(a), value(b), "sub");
  Tensor out = value(a);
  map(out) -= map(value(b));
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    map(t.grad_mut(a)) += map(n.grad);
    map(t.grad_mut(b)) -= map(n.grad);
  });
}

VarId Tape::mul(VarId a, VarId b) {
  require_same_shape(value(a), value(b), "mul");
  Tensor out = value(a);
  map(out).array() *= map(value(b)).array();
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    map(t.grad_mut(a)).array() += map(n.grad).array() * map(t.value(b)).array();
    map(t.grad_mut(b)).array() += map(n.grad).array() * map(t.value(a)).array();
  });
}

VarId Tape::scale(VarId a, double c) {
  Tensor out = value(a);
  map(out) *= c;
  return emit(std::move(out), {a}, [a, c](Tape& t, const Node& n) {
    map(t.grad_mut(a)) += c * map(n.grad);
  });
}

VarId Tape::relu(VarId a) {
  Tensor out = value(a);
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return emit(std::move(out), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    const Tensor& x = t.value(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.data[i] > 0.0) g.data[i] += n.grad.data[i];
  });
}

VarId Tape::sqrt_elem(VarId a) {
  Tensor out = value(a);
  for (double& v : out.data) v = std::sqrt(v);
  return emit(std::move(out), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      g.data[i] += n.grad.data[i] * 0.5 / n.value.data[i];
  });
}

VarId Tape::row_sum(VarId a) {
  const Tensor& ta = value(a);
  Tensor out(ta.rows, 1);
  for (int r = 0; r < ta.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < ta.cols; ++c) s += ta.at(r, c);
    out.at(r, 0) = s;
  }
  return emit(std::move(out), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) g.at(r, c) += n.grad.at(r, 0);
  });
}

VarId Tape::sum(VarId a) {
  double s = 0.0;
  for (double v : value(a).data) s += v;
  return emit(Tensor::scalar(s), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (double& v : g.data) v += n.grad.data[0];
  });
}

VarId Tape::scale_rows(VarId a, VarId s) {
  const Tensor& ta = value(a);
  const Tensor& ts = value(s);
  if (ts.rows != ta.rows || ts.cols != 1)
    throw ShapeError("scale_rows: " + ta.shape_str() + " by " + ts.shape_str());
  Tensor out = ta;
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) *= ts.at(r, 0);
  return emit(std::move(out), {a, s}, [a, s](Tape& t, const Node& n) {
    Tensor& ga = t.grad_mut(a);
    Tensor& gs = t.grad_mut(s);
    const Tensor& ta = t.value(a);
    const Tensor& ts = t.value(s);
    for (int r = 0; r < ta.rows; ++r) {
      double acc = 0.0;
      for (int c = 0; c < ta.cols; ++c) {
        ga.at(r, c) += n.grad.at(r, c) * ts.at(r, 0);
        acc += n.grad.at(r, c) * ta.at(r, c);
      }
      gs.at(r, 0) += acc;
    }
  });
}

VarId Tape::add_rowvec(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (tb.rows != 1 || tb.cols != ta.cols)
    throw ShapeError("add_rowvec: " + ta.shape_str() + " + " + tb.shape_str());
  Tensor out = ta;
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c) out.at(r, c) += tb.at(0, c);
  return emit(std::move(out), {a, b}, [a, b](Tape& t, const Node& n) {
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int r = 0; r < n.grad.rows; ++r)
      for (int c = 0; c < n.grad.cols; ++c) {
        ga.at(r, c) += n.grad.at(r, c);
        gb.at(0, c) += n.grad.at(r, c);
      }
  });
}

VarId Tape::concat_rows(const std::vector<VarId>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no parts");
  int cols = value(parts[0]).cols;
  int rows = 0;
  for (VarId p : parts) {
    if (value(p).cols != cols)
      throw ShapeError("concat_rows: column mismatch " + value(p).shape_str());
    rows += value(p).rows;
  }
  Tensor out(rows, cols);
  int r0 = 0;
  for (VarId p : parts) {
    const Tensor& tp = value(p);
    std::copy(tp.data.begin(), tp.data.end(),
              out.data.begin() + static_cast<std::size_t>(r0) * cols);
    r0 += tp.rows;
  }
  return emit(std::move(out), parts, [parts](Tape& t, const Node& n) {
    int r0 = 0;
    for (VarId p : parts) {
      Tensor& g = t.grad_mut(p);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) g.at(r, c) += n.grad.at(r0 + r, c);
      r0 += g.rows;
    }
  });
}

VarId Tape::concat_cols(const std::vector<VarId>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no parts");
  int rows = value(parts[0]).rows;
  int cols = 0;
  for (VarId p : parts) {
    if (value(p).rows != rows)
      throw ShapeError("concat_cols: row mismatch " + value(p).shape_str());
    cols += value(p).cols;
  }
  Tensor out(rows, cols);
  int c0 = 0;
  for (VarId p : parts) {
    const Tensor& tp = value(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < tp.cols; ++c) out.at(r, c0 + c) = tp.at(r, c);
    c0 += tp.cols;
  }
  return emit(std::move(out), parts, [parts](Tape& t, const Node& n) {
    int c0 = 0;
    for (VarId p : parts) {
      Tensor& g = t.grad_mut(p);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) g.at(r, c) += n.grad.at(r, c0 + c);
      c0 += g.cols;
    }
  });
}

VarId Tape::slice_cols(VarId a, int start, int len) {
  const Tensor& ta = value(a);
  if (start < 0 || len <= 0 || start + len > ta.cols)
    throw ShapeError("slice_cols: [" + std::to_string(start) + "," +
                     std::to_string(start + len) + ") of " + ta.shape_str());
  Tensor out(ta.rows, len);
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < len; ++c) out.at(r, c) = ta.at(r, start + c);
  return emit(std::move(out), {a}, [a, start, len](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (int r = 0; r < n.grad.rows; ++r)
      for (int c = 0; c < len; ++c) g.at(r, start + c) += n.grad.at(r, c);
  });
}

VarId Tape::gather_rows(VarId table, std::vector<int> indices) {
  const Tensor& tt = value(table);
  for (int i : indices)
    if (i < 0 || i >= tt.rows)
      throw ShapeError("gather_rows: index " + std::to_string(i) + " out of " +
                       tt.shape_str());
  Tensor out(static_cast<int>(indices.size()), tt.cols);
  for (std::size_t r = 0; r < indices.size(); ++r)
    for (int c = 0; c < tt.cols; ++c) out.at(static_cast<int>(r), c) = tt.at(indices[r], c);
  return emit(std::move(out), {table},
              [table, idx = std::move(indices)](Tape& t, const Node& n) {
                Tensor& g = t.grad_mut(table);
                for (std::size_t r = 0; r < idx.size(); ++r)
                  for (int c = 0; c < g.cols; ++c)
                    g.at(idx[r], c) += n.grad.at(static_cast<int>(r), c);
              });
}

VarId Tape::segment_mean(VarId data, std::vector<int> segments, int n_segments) {
  const Tensor& td = value(data);
  if (static_cast<int>(segments.size()) != td.rows)
    throw ShapeError("segment_mean: " + std::to_string(segments.size()) +
                     " segment ids for " + td.shape_str());
  std::vector<int> counts(n_segments, 0);
  for (int s : segments) {
    if (s < 0 || s >= n_segments)
      throw ShapeError("segment_mean: segment id " + std::to_string(s) + " out of range");
    ++counts[s];
  }
  Tensor out(n_segments, td.cols);
  for (int r = 0; r < td.rows; ++r)
    for (int c = 0; c < td.cols; ++c) out.at(segments[r], c) += td.at(r, c);
  for (int s = 0; s < n_segments; ++s)
    if (counts[s] > 1)
      for (int c = 0; c < td.cols; ++c) out.at(s, c) /= counts[s];
  return emit(std::move(out), {data},
              [data, seg = std::move(segments), counts](Tape& t, const Node& n) {
                Tensor& g = t.grad_mut(data);
                for (int r = 0; r < g.rows; ++r)
                  for (int c = 0; c < g.cols; ++c)
                    g.at(r, c) += n.grad.at(seg[r], c) / counts[seg[r]];
              });
}

namespace {
// Row-wise softmax with max subtraction; shared by both softmax ops.
Tensor softmax_values(const Tensor& x) {
  Tensor p = x;
  for (int r = 0; r < x.rows; ++r) {
    double mx = x.at(r, 0);
    for (int c = 1; c < x.cols; ++c) mx = std::max(mx, x.at(r, c));
    double z = 0.0;
    for (int c = 0; c < x.cols; ++c) {
      p.at(r, c) = std::exp(x.at(r, c) - mx);
      z += p.at(r, c);
    }
    for (int c = 0; c < x.cols; ++c) p.at(r, c) /= z;
  }
  return p;
}
}  // namespace

VarId Tape::softmax_rows(VarId a) {
  Tensor p = softmax_values(value(a));
  return emit(std::move(p), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    const Tensor& p = n.value;
    for (int r = 0; r < p.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < p.cols; ++c) dot += n.grad.at(r, c) * p.at(r, c);
      for (int c = 0; c < p.cols; ++c)
        g.at(r, c) += p.at(r, c) * (n.grad.at(r, c) - dot);
    }
  });
}

VarId Tape::log_softmax_rows(VarId a) {
  const Tensor& x = value(a);
  Tensor out = x;
  for (int r = 0; r < x.rows; ++r) {
    double mx = x.at(r, 0);
    for (int c = 1; c < x.cols; ++c) mx = std::max(mx, x.at(r, c));
    double z = 0.0;
    for (int c = 0; c < x.cols; ++c) z += std::exp(x.at(r, c) - mx);
    double lz = mx + std::log(z);
    for (int c = 0; c < x.cols; ++c) out.at(r, c) = x.at(r, c) - lz;
  }
  return emit(std::move(out), {a}, [a](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (int r = 0; r < n.value.rows; ++r) {
      double gsum = 0.0;
      for (int c = 0; c < n.value.cols; ++c) gsum += n.grad.at(r, c);
      for (int c = 0; c < n.value.cols; ++c)
        g.at(r, c) += n.grad.at(r, c) - std::exp(n.value.at(r, c)) * gsum;
    }
  });
}

VarId Tape::layer_norm_rows(VarId x, VarId gain, VarId shift, double eps) {
  const Tensor& tx = value(x);
  const Tensor& tg = value(gain);
  const Tensor& tb = value(shift);
  if (tg.rows != 1 || tg.cols != tx.cols || tb.rows != 1 || tb.cols != tx.cols)
    throw ShapeError("layer_norm_rows: gain/shift must be [1," +
                     std::to_string(tx.cols) + "]");
  int d = tx.cols;
  Tensor out(tx.rows, d);
  Tensor xhat(tx.rows, d);
  std::vector<double> inv_sigma(tx.rows);
  for (int r = 0; r < tx.rows; ++r) {
    double mean = 0.0;
    for (int c = 0; c < d; ++c) mean += tx.at(r, c);
    mean /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) {
      double dv = tx.at(r, c) - mean;
      var += dv * dv;
    }
    var /= d;
    inv_sigma[r] = 1.0 / std::sqrt(var + eps);
    for (int c = 0; c < d; ++c) {
      xhat.at(r, c) = (tx.at(r, c) - mean) * inv_sigma[r];
      out.at(r, c) = tg.at(0, c) * xhat.at(r, c) + tb.at(0, c);
    }
  }
  return emit(std::move(out), {x, gain, shift},
              [x, gain, shift, xhat = std::move(xhat),
               inv_sigma = std::move(inv_sigma)](Tape& t, const Node& n) {
                Tensor& gx = t.grad_mut(x);
                Tensor& gg = t.grad_mut(gain);
                Tensor& gb = t.grad_mut(shift);
                const Tensor& tg = t.value(gain);
                int d = xhat.cols;
                for (int r = 0; r < xhat.rows; ++r) {
                  double mean_dy = 0.0, mean_dy_xhat = 0.0;
                  for (int c = 0; c < d; ++c) {
                    double dy = n.grad.at(r, c) * tg.at(0, c);
                    mean_dy += dy;
                    mean_dy_xhat += dy * xhat.at(r, c);
                    gg.at(0, c) += n.grad.at(r, c) * xhat.at(r, c);
                    gb.at(0, c) += n.grad.at(r, c);
                  }
                  mean_dy /= d;
                  mean_dy_xhat /= d;
                  for (int c = 0; c < d; ++c) {
                    double dy = n.grad.at(r, c) * tg.at(0, c);
                    gx.at(r, c) += inv_sigma[r] *
                                   (dy - mean_dy - xhat.at(r, c) * mean_dy_xhat);
                  }
                }
              });
}

VarId Tape::dropout(VarId a, const Tensor& mask) {
  require_same_shape(value(a), mask, "dropout");
  Tensor out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= mask.data[i];
  return emit(std::move(out), {a}, [a, mask](Tape& t, const Node& n) {
    Tensor& g = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i] * mask.data[i];
  });
}

void Tape::backward(VarId loss) {
  const Tensor& lv = value(loss);
  if (lv.rows != 1 || lv.cols != 1)
    throw ShapeError("backward: loss must be scalar, got " + lv.shape_str());
  for (auto& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  nodes_[loss].grad.data[0] = 1.0;
  for (VarId v = loss; v >= 0; --v) {
    const Node& n = nodes_[v];
    if (n.backprop) n.backprop(*this, n);
  }
}

int ParamSet::add(const std::string& name, Tensor value) {
  names.push_back(name);
  values.push_back(std::move(value));
  return static_cast<int>(values.size() - 1);
}

int ParamSet::index(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

BoundParams bind(Tape& tape, const ParamSet& params) {
  BoundParams b;
  b.vars.reserve(params.size());
  for (const auto& t : params.values) b.vars.push_back(tape.param(t));
  return b;
}

double finite_difference_check(
    const std::function<double(const ParamSet&)>& loss_fn, ParamSet params,
    int param_index, const Tensor& analytic_grad, int n_coords,
    std::mt19937_64& rng, double step) {
  Tensor& target = params[param_index];
  std::uniform_int_distribution<std::size_t> pick(0, target.size() - 1);
  double worst = 0.0;
  for (int i = 0; i < n_coords; ++i) {
    std::size_t coord = pick(rng);
    double original = target.data[coord];
    target.data[coord] = original + step;
    double up = loss_fn(params);
    target.data[coord] = original - step;
    double down = loss_fn(params);
    target.data[coord] = original;
    double numeric = (up - down) / (2.0 * step);
    double analytic = analytic_grad.data[coord];
    double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

}  // namespace hkg::ad
