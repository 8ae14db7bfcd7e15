#include "gcalstm/model.hpp"

#include <algorithm>
#include <cmath>

#include "gcalstm/activations.hpp"
#include "gcalstm/errors.hpp"

namespace gcalstm {

namespace {

Vec concat2(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void add_to(Vec& dst, const Vec& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void mul_inplace(Vec& dst, const Vec& mask) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= mask[i];
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::gca: return "gca";
    case ModelVariant::gca_coarse: return "gca_coarse";
    case ModelVariant::two_stream: return "two_stream";
    case ModelVariant::baseline_global_1: return "baseline_global_1";
    case ModelVariant::baseline_global_2: return "baseline_global_2";
  }
  return "?";
}

ModelVariant model_variant_from_string(const std::string& s) {
  if (s == "gca") return ModelVariant::gca;
  if (s == "gca_coarse") return ModelVariant::gca_coarse;
  if (s == "two_stream") return ModelVariant::two_stream;
  if (s == "baseline_global_1") return ModelVariant::baseline_global_1;
  if (s == "baseline_global_2") return ModelVariant::baseline_global_2;
  throw ContractError("unknown model variant: " + s);
}

bool ModelConfig::has_fine_stream() const {
  return variant == ModelVariant::gca || variant == ModelVariant::two_stream;
}

bool ModelConfig::has_coarse_stream() const {
  return variant == ModelVariant::gca_coarse || variant == ModelVariant::two_stream;
}

bool ModelConfig::is_baseline() const {
  return variant == ModelVariant::baseline_global_1 || variant == ModelVariant::baseline_global_2;
}

void ModelConfig::validate() const {
  if (joints == 0 || frames == 0) throw ContractError("ModelConfig: empty lattice");
  if (hidden == 0) throw ContractError("ModelConfig: hidden dimension must be positive");
  if (classes < 2) throw ContractError("ModelConfig: need at least 2 classes");
  if (input_dim == 0) throw ContractError("ModelConfig: input dimension must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ContractError("ModelConfig: dropout must lie in [0, 1)");
  if (!joint_order.order.empty()) joint_order.validate(joints);
  if (!is_baseline()) attention.validate();
  if (has_coarse_stream()) partition.validate(joints);
}

ScoreSlotNames score_slot_names(const std::string& stream, const AttentionConfig& cfg,
                                std::size_t iteration, std::size_t row, std::size_t col) {
  std::string base = stream + ".att";
  if (!cfg.share_across_iterations) base += std::to_string(iteration);
  if (!cfg.share_within_iteration) base += ".r" + std::to_string(row) + "c" + std::to_string(col);
  return {base + ".We1", base + ".be1", base + ".We2", base + ".be2"};
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.joint_order.order.empty()) cfg_.joint_order = JointOrder::identity(cfg_.joints);
  cfg_.validate();

  position_of_joint_.resize(cfg_.joints);
  for (std::size_t pos = 0; pos < cfg_.joints; ++pos) {
    position_of_joint_[cfg_.joint_order.order[pos]] = pos;
  }
  if (cfg_.has_coarse_stream()) {
    part_of_position_.resize(cfg_.joints);
    for (std::size_t pos = 0; pos < cfg_.joints; ++pos) {
      part_of_position_[pos] = cfg_.partition.part_of_joint[cfg_.joint_order.order[pos]];
    }
  }
  register_params();
}

void Model::register_params() {
  const std::size_t d = cfg_.hidden;
  store_.add("l1.W", 5 * d, cfg_.input_dim + 2 * d, 0);
  store_.add("l1.b", 5 * d, 1, 0);

  if (cfg_.is_baseline()) {
    store_.add("l2.W", 5 * d, 3 * d, 0);
    store_.add("l2.b", 5 * d, 1, 0);
    if (cfg_.variant == ModelVariant::baseline_global_1) {
      store_.add("head.W", d, cfg_.joints * cfg_.frames * d, 0);
      store_.add("head.b", d, 1, 0);
    }
    store_.add("cls.W", cfg_.classes, d, 0);
    store_.add("cls.b", cfg_.classes, 1, 0);
    return;
  }

  if (cfg_.attention.init_mode == InitMode::feedforward) {
    store_.add("init.W", d, cfg_.joints * cfg_.frames * d, 0);
    store_.add("init.b", d, 1, 0);
  }
  if (cfg_.has_fine_stream()) register_stream_params("fine", cfg_.joints);
  if (cfg_.has_coarse_stream()) register_stream_params("coarse", kBodyPartCount);
}

void Model::register_stream_params(const std::string& stream, std::size_t grid_rows) {
  const std::size_t d = cfg_.hidden;
  const std::size_t d_e = cfg_.attention.score_hidden;
  const AttentionConfig& att = cfg_.attention;

  if (att.attention_mode == AttentionMode::gate) {
    store_.add(stream + ".l2.W", 5 * d, 3 * d, 1);
    store_.add(stream + ".l2.b", 5 * d, 1, 1);
  }

  for (std::size_t n = 1; n <= att.iterations; ++n) {
    if (att.share_across_iterations && n > 1) break;  // iteration slots alias n = 1
    const int iter = static_cast<int>(n);
    auto add_slot = [&](std::size_t row, std::size_t col) {
      const ScoreSlotNames slot = score_slot_names(stream, att, n, row, col);
      store_.add(slot.We1, 1, d_e, iter);
      store_.add(slot.be1, 1, 1, iter);
      store_.add(slot.We2, d_e, 2 * d, iter);
      store_.add(slot.be2, d_e, 1, iter);
    };
    if (att.share_within_iteration) {
      add_slot(0, 0);
    } else {
      for (std::size_t row = 0; row < grid_rows; ++row) {
        for (std::size_t col = 0; col < cfg_.frames; ++col) add_slot(row, col);
      }
    }
  }

  for (std::size_t n = 1; n <= att.iterations; ++n) {
    store_.add(stream + ".ref" + std::to_string(n) + ".W", d, 2 * d, static_cast<int>(n));
    store_.add(stream + ".ref" + std::to_string(n) + ".b", d, 1, static_cast<int>(n));
  }
  store_.add(stream + ".cls.W", cfg_.classes, d, 0);
  store_.add(stream + ".cls.b", cfg_.classes, 1, 0);
}

void Model::init_params(RngStream& rng) {
  store_.init(cfg_.init_family, cfg_.init_gaussian_stddev, rng);
}

std::vector<Vec> Model::chain_inputs(const SkeletonSequence& seq) const {
  const std::size_t T = cfg_.frames;
  std::vector<Vec> inputs(cfg_.joints * T);
  for (std::size_t pos = 0; pos < cfg_.joints; ++pos) {
    const std::size_t joint = cfg_.joint_order.order[pos];
    for (std::size_t t = 0; t < T; ++t) {
      inputs[pos * T + t] = {seq.at(joint, t, 0), seq.at(joint, t, 1), seq.at(joint, t, 2)};
    }
  }
  return inputs;
}

Vec Model::initial_context(const LatticeState& layer1) const {
  if (cfg_.attention.init_mode == InitMode::average) return layer1.mean_hidden();
  const Vec flat = layer1.concat_hidden();
  return tanh_act(affine(store_.get("init.W").value, store_.get("init.b").value.data, flat, "init"));
}

AttentionMap Model::map_to_joint_space(const AttentionMap& map) const {
  if (map.scores.rows != cfg_.joints) return map;  // coarse maps are already in part space
  AttentionMap out;
  out.iteration = map.iteration;
  out.scores = DenseMatrix(map.scores.rows, map.scores.cols);
  for (std::size_t pos = 0; pos < cfg_.joints; ++pos) {
    const std::size_t joint = cfg_.joint_order.order[pos];
    for (std::size_t t = 0; t < map.scores.cols; ++t) {
      out.scores.at(joint, t) = map.scores.at(pos, t);
    }
  }
  return out;
}

ModelForward Model::forward(const SkeletonSequence& seq, bool training, RngStream* rng,
                            std::optional<std::size_t> supervise) const {
  if (seq.joints != cfg_.joints || seq.frames != cfg_.frames) {
    throw ShapeError("forward: sequence '" + seq.id + "' is " + std::to_string(seq.joints) + "x" +
                     std::to_string(seq.frames) + " but the model expects " + std::to_string(cfg_.joints) +
                     "x" + std::to_string(cfg_.frames));
  }
  const bool use_dropout = training && cfg_.dropout > 0.0;
  if (use_dropout && rng == nullptr) {
    throw ContractError("forward: training with dropout requires an rng stream");
  }

  ModelForward fwd;
  fwd.training = use_dropout;
  fwd.inputs = chain_inputs(seq);
  fwd.layer1 = lattice_forward(store_.get("l1.W").value, store_.get("l1.b").value.data, fwd.inputs,
                               cfg_.joints, cfg_.frames, cfg_.hidden);
  fwd.layer1_evals = 1;

  if (cfg_.is_baseline()) {
    fwd.supervised_iteration = 0;
    baseline_forward_pass(fwd, training, rng);
    return fwd;
  }

  const std::size_t n_run = supervise.value_or(cfg_.attention.iterations);
  if (n_run > cfg_.attention.iterations) {
    throw ContractError("forward: supervised iteration " + std::to_string(n_run) +
                        " exceeds configured attention iterations");
  }
  fwd.supervised_iteration = n_run;

  const Vec context0 = initial_context(fwd.layer1);
  if (cfg_.has_fine_stream()) {
    fwd.fine.contexts.push_back(context0);
    run_stream("fine", false, fwd, fwd.fine, n_run, training, rng);
  }
  if (cfg_.has_coarse_stream()) {
    fwd.coarse.contexts.push_back(context0);
    run_stream("coarse", true, fwd, fwd.coarse, n_run, training, rng);
  }

  if (cfg_.variant == ModelVariant::two_stream) {
    fwd.posterior.resize(cfg_.classes);
    for (std::size_t k = 0; k < cfg_.classes; ++k) {
      fwd.posterior[k] = 0.5 * (fwd.fine.posterior[k] + fwd.coarse.posterior[k]);
    }
  } else {
    fwd.posterior = cfg_.has_fine_stream() ? fwd.fine.posterior : fwd.coarse.posterior;
  }
  return fwd;
}

void Model::run_stream(const std::string& stream, bool coarse, const ModelForward& fwd, StreamForward& out,
                       std::size_t n_run, bool training, RngStream* rng) const {
  const std::size_t J = cfg_.joints;
  const std::size_t T = cfg_.frames;
  const std::size_t d = cfg_.hidden;
  const std::size_t rows = coarse ? kBodyPartCount : J;
  const AttentionConfig& att = cfg_.attention;
  const bool use_dropout = training && cfg_.dropout > 0.0;
  const bool gate_mode = att.attention_mode == AttentionMode::gate;

  if (use_dropout) {
    out.input_mask.resize(J * T);
    for (auto& mask : out.input_mask) mask = dropout_mask(d, cfg_.dropout, *rng);
    out.context_mask = dropout_mask(d, cfg_.dropout, *rng);
  }

  if (coarse) {
    out.part_means.assign(rows * T, Vec(d, 0.0));
    for (std::size_t p = 0; p < rows; ++p) {
      const auto& joints = cfg_.partition.joints_of_part[p];
      const double scale = 1.0 / static_cast<double>(joints.size());
      for (std::size_t t = 0; t < T; ++t) {
        Vec& mean = out.part_means[p * T + t];
        for (std::size_t j : joints) {
          const Vec& h = fwd.layer1.h[position_of_joint_[j] * T + t];
          for (std::size_t k = 0; k < d; ++k) mean[k] += h[k];
        }
        for (double& v : mean) v *= scale;
      }
    }
  }

  // Layer-2 inputs are the (possibly dropped) first-layer hidden states; the
  // lattice cache keeps its own copy for the backward pass.
  std::vector<Vec> layer2_inputs;
  if (gate_mode) {
    layer2_inputs = fwd.layer1.h;
    if (use_dropout) {
      for (std::size_t idx = 0; idx < layer2_inputs.size(); ++idx) {
        mul_inplace(layer2_inputs[idx], out.input_mask[idx]);
      }
    }
  }

  auto score_input = [&](std::size_t row, std::size_t t) -> const Vec& {
    return coarse ? out.part_means[row * T + t] : fwd.layer1.h[row * T + t];
  };

  for (std::size_t n = 1; n <= n_run; ++n) {
    const Vec& ctx = out.contexts[n - 1];

    Vec e_flat(rows * T);
    auto& hidden_scores = out.score_hidden.emplace_back(rows * T);
    for (std::size_t row = 0; row < rows; ++row) {
      for (std::size_t t = 0; t < T; ++t) {
        const ScoreSlotNames slot = score_slot_names(stream, att, n, row, t);
        const Vec cat = concat2(score_input(row, t), ctx);
        Vec g = tanh_act(affine(store_.get(slot.We2).value, store_.get(slot.be2).value.data, cat,
                                slot.We2));
        const ParamTensor& We1 = store_.get(slot.We1);
        double e = store_.get(slot.be1).value.data[0];
        for (std::size_t k = 0; k < g.size(); ++k) e += We1.value.data[k] * g[k];
        e_flat[row * T + t] = e;
        hidden_scores[row * T + t] = std::move(g);
      }
    }

    AttentionMap map;
    map.iteration = n;
    map.scores = DenseMatrix(rows, T);
    map.scores.data = softmax_flat(e_flat);
    out.maps.push_back(map);
    const Vec& r = out.maps.back().scores.data;

    Vec repr;
    if (gate_mode) {
      GateGrid gates(J, T);
      if (coarse) {
        for (std::size_t pos = 0; pos < J; ++pos) {
          for (std::size_t t = 0; t < T; ++t) gates.at(pos, t) = r[part_of_position_[pos] * T + t];
        }
      } else {
        gates.data = r;
      }
      LatticeState layer2 =
          lattice_forward(store_.get(stream + ".l2.W").value, store_.get(stream + ".l2.b").value.data,
                          layer2_inputs, J, T, d, &gates);
      repr = layer2.h.back();  // hidden state of the last spatio-temporal step
      out.layer2.push_back(std::move(layer2));
    } else {
      repr.assign(d, 0.0);
      for (std::size_t idx = 0; idx < rows * T; ++idx) {
        const Vec& v = score_input(idx / T, idx % T);
        for (std::size_t k = 0; k < d; ++k) repr[k] += r[idx] * v[k];
      }
    }
    out.attention_repr.push_back(repr);

    const std::string tag = stream + ".ref" + std::to_string(n);
    const Vec pre = affine(store_.get(tag + ".W").value, store_.get(tag + ".b").value.data,
                           concat2(repr, ctx), tag);
    out.contexts.push_back(relu(pre));
  }

  out.dropped_context = out.contexts[n_run];
  if (use_dropout) mul_inplace(out.dropped_context, out.context_mask);
  out.logits = affine(store_.get(stream + ".cls.W").value, store_.get(stream + ".cls.b").value.data,
                      out.dropped_context, stream + ".cls");
  out.posterior = softmax_flat(out.logits);
}

void Model::baseline_forward_pass(ModelForward& fwd, bool training, RngStream* rng) const {
  const std::size_t J = cfg_.joints;
  const std::size_t T = cfg_.frames;
  const std::size_t d = cfg_.hidden;
  const bool use_dropout = training && cfg_.dropout > 0.0;
  BaselineForward& b = fwd.baseline;

  std::vector<Vec> layer2_inputs = fwd.layer1.h;
  if (use_dropout) {
    b.input_mask.resize(J * T);
    for (std::size_t idx = 0; idx < layer2_inputs.size(); ++idx) {
      b.input_mask[idx] = dropout_mask(d, cfg_.dropout, *rng);
      mul_inplace(layer2_inputs[idx], b.input_mask[idx]);
    }
  }
  b.layer2 = lattice_forward(store_.get("l2.W").value, store_.get("l2.b").value.data, layer2_inputs, J, T,
                             d);

  if (cfg_.variant == ModelVariant::baseline_global_2) {
    b.global_repr = b.layer2.mean_hidden();
  } else {
    const Vec flat = b.layer2.concat_hidden();
    b.global_repr = tanh_act(affine(store_.get("head.W").value, store_.get("head.b").value.data, flat,
                                    "head"));
  }

  b.dropped_global = b.global_repr;
  if (use_dropout) {
    b.context_mask = dropout_mask(d, cfg_.dropout, *rng);
    mul_inplace(b.dropped_global, b.context_mask);
  }
  b.logits = affine(store_.get("cls.W").value, store_.get("cls.b").value.data, b.dropped_global, "cls");
  fwd.posterior = softmax_flat(b.logits);
}

double Model::loss(const ModelForward& fwd, std::size_t label) const {
  return nll_loss(fwd.posterior, label);
}

double Model::eval_loss(const SkeletonSequence& seq, std::size_t label,
                        std::optional<std::size_t> supervise) const {
  return nll_loss(forward(seq, false, nullptr, supervise).posterior, label);
}

double Model::backward(const ModelForward& fwd, std::size_t label, double weight) {
  const Vec& posterior = fwd.posterior;
  const double loss = nll_loss(posterior, label);

  Vec dposterior(posterior.size(), 0.0);
  if (posterior[label] > 1e-12) dposterior[label] = -weight / posterior[label];

  const std::size_t d = cfg_.hidden;
  std::vector<Vec> dh1(cfg_.joints * cfg_.frames, Vec(d, 0.0));

  if (cfg_.is_baseline()) {
    baseline_backward(fwd, dposterior, dh1);
  } else {
    Vec dcontext0(d, 0.0);
    if (cfg_.variant == ModelVariant::two_stream) {
      Vec half(dposterior);
      for (double& v : half) v *= 0.5;
      stream_backward("fine", false, fwd, fwd.fine, half, dh1, dcontext0);
      stream_backward("coarse", true, fwd, fwd.coarse, half, dh1, dcontext0);
    } else if (cfg_.has_fine_stream()) {
      stream_backward("fine", false, fwd, fwd.fine, dposterior, dh1, dcontext0);
    } else {
      stream_backward("coarse", true, fwd, fwd.coarse, dposterior, dh1, dcontext0);
    }

    if (cfg_.attention.init_mode == InitMode::average) {
      const double scale = 1.0 / static_cast<double>(dh1.size());
      for (auto& g : dh1) {
        for (std::size_t k = 0; k < d; ++k) g[k] += scale * dcontext0[k];
      }
    } else {
      const Vec& context0 =
          cfg_.has_fine_stream() ? fwd.fine.contexts[0] : fwd.coarse.contexts[0];
      Vec dpre(d);
      for (std::size_t k = 0; k < d; ++k) dpre[k] = dcontext0[k] * (1.0 - context0[k] * context0[k]);
      const Vec flat = fwd.layer1.concat_hidden();
      ParamTensor& Wi = store_.get("init.W");
      outer_add(Wi.grad, dpre.data(), flat.data());
      add_to(store_.get("init.b").grad.data, dpre);
      Vec dflat(flat.size(), 0.0);
      matvec_transpose_add(Wi.value, dpre.data(), dflat.data());
      for (std::size_t idx = 0; idx < dh1.size(); ++idx) {
        for (std::size_t k = 0; k < d; ++k) dh1[idx][k] += dflat[idx * d + k];
      }
    }
  }

  lattice_backward(store_.get("l1.W"), store_.get("l1.b"), fwd.layer1, dh1);
  return loss;
}

void Model::stream_backward(const std::string& stream, bool coarse, const ModelForward& fwd,
                            const StreamForward& sf, const Vec& dposterior, std::vector<Vec>& dh1,
                            Vec& dcontext0) {
  const std::size_t J = cfg_.joints;
  const std::size_t T = cfg_.frames;
  const std::size_t d = cfg_.hidden;
  const std::size_t rows = coarse ? kBodyPartCount : J;
  const AttentionConfig& att = cfg_.attention;
  const bool gate_mode = att.attention_mode == AttentionMode::gate;
  const bool masked = !sf.input_mask.empty();

  // Classifier.
  const Vec dlogits = softmax_backward(sf.posterior, dposterior);
  ParamTensor& Wc = store_.get(stream + ".cls.W");
  outer_add(Wc.grad, dlogits.data(), sf.dropped_context.data());
  add_to(store_.get(stream + ".cls.b").grad.data, dlogits);
  Vec dcontext(d, 0.0);
  matvec_transpose_add(Wc.value, dlogits.data(), dcontext.data());
  if (!sf.context_mask.empty()) mul_inplace(dcontext, sf.context_mask);

  std::vector<Vec> dpart_means;
  if (coarse) dpart_means.assign(rows * T, Vec(d, 0.0));

  auto score_input = [&](std::size_t row, std::size_t t) -> const Vec& {
    return coarse ? sf.part_means[row * T + t] : fwd.layer1.h[row * T + t];
  };
  auto input_grad_target = [&](std::size_t row, std::size_t t) -> Vec& {
    return coarse ? dpart_means[row * T + t] : dh1[row * T + t];
  };

  const std::size_t n_run = sf.maps.size();
  for (std::size_t n = n_run; n >= 1; --n) {
    const Vec& context_prev = sf.contexts[n - 1];
    const Vec& repr = sf.attention_repr[n - 1];
    const Vec& r = sf.maps[n - 1].scores.data;

    // Refinement: context_n = relu(W [repr; context_prev] + b).
    const std::string tag = stream + ".ref" + std::to_string(n);
    Vec dpre(d);
    for (std::size_t k = 0; k < d; ++k) dpre[k] = sf.contexts[n][k] > 0.0 ? dcontext[k] : 0.0;
    ParamTensor& Wf = store_.get(tag + ".W");
    const Vec cat = concat2(repr, context_prev);
    outer_add(Wf.grad, dpre.data(), cat.data());
    add_to(store_.get(tag + ".b").grad.data, dpre);
    Vec dcat(2 * d, 0.0);
    matvec_transpose_add(Wf.value, dpre.data(), dcat.data());
    Vec drepr(dcat.begin(), dcat.begin() + d);
    Vec dcontext_prev(dcat.begin() + d, dcat.end());

    // Attention representation.
    Vec dr(rows * T, 0.0);
    if (gate_mode) {
      std::vector<Vec> dh2(J * T, Vec(d, 0.0));
      dh2.back() = drepr;
      GateGrid gates(J, T);
      if (coarse) {
        for (std::size_t pos = 0; pos < J; ++pos) {
          for (std::size_t t = 0; t < T; ++t) gates.at(pos, t) = r[part_of_position_[pos] * T + t];
        }
      } else {
        gates.data = r;
      }
      LatticeGrads lg = lattice_backward(store_.get(stream + ".l2.W"), store_.get(stream + ".l2.b"),
                                         sf.layer2[n - 1], dh2, &gates);
      for (std::size_t idx = 0; idx < J * T; ++idx) {
        Vec& dx = lg.dinput[idx];
        if (masked) mul_inplace(dx, sf.input_mask[idx]);
        add_to(dh1[idx], dx);
      }
      if (coarse) {
        for (std::size_t pos = 0; pos < J; ++pos) {
          for (std::size_t t = 0; t < T; ++t) {
            dr[part_of_position_[pos] * T + t] += lg.dgates.at(pos, t);
          }
        }
      } else {
        dr = lg.dgates.data;
      }
    } else {
      for (std::size_t idx = 0; idx < rows * T; ++idx) {
        const Vec& v = score_input(idx / T, idx % T);
        dr[idx] = dot(drepr, v);
        Vec& dv = input_grad_target(idx / T, idx % T);
        for (std::size_t k = 0; k < d; ++k) dv[k] += r[idx] * drepr[k];
      }
    }

    const Vec de = softmax_backward(r, dr);

    // Scores: e = We1 tanh(We2 [v; context_prev] + be2) + be1.
    for (std::size_t row = 0; row < rows; ++row) {
      for (std::size_t t = 0; t < T; ++t) {
        const std::size_t idx = row * T + t;
        const double de_s = de[idx];
        const ScoreSlotNames slot = score_slot_names(stream, att, n, row, t);
        const Vec& g = sf.score_hidden[n - 1][idx];

        ParamTensor& We1 = store_.get(slot.We1);
        for (std::size_t k = 0; k < g.size(); ++k) We1.grad.data[k] += de_s * g[k];
        store_.get(slot.be1).grad.data[0] += de_s;

        Vec ds(g.size());
        for (std::size_t k = 0; k < g.size(); ++k) {
          ds[k] = de_s * We1.value.data[k] * (1.0 - g[k] * g[k]);
        }
        ParamTensor& We2 = store_.get(slot.We2);
        const Vec cat2 = concat2(score_input(row, t), context_prev);
        outer_add(We2.grad, ds.data(), cat2.data());
        add_to(store_.get(slot.be2).grad.data, ds);
        Vec dcat2(2 * d, 0.0);
        matvec_transpose_add(We2.value, ds.data(), dcat2.data());
        Vec& dv = input_grad_target(row, t);
        for (std::size_t k = 0; k < d; ++k) dv[k] += dcat2[k];
        for (std::size_t k = 0; k < d; ++k) dcontext_prev[k] += dcat2[d + k];
      }
    }

    dcontext = std::move(dcontext_prev);
  }

  add_to(dcontext0, dcontext);

  if (coarse) {
    for (std::size_t p = 0; p < rows; ++p) {
      const auto& joints = cfg_.partition.joints_of_part[p];
      const double scale = 1.0 / static_cast<double>(joints.size());
      for (std::size_t t = 0; t < T; ++t) {
        const Vec& dpm = dpart_means[p * T + t];
        for (std::size_t j : joints) {
          Vec& target = dh1[position_of_joint_[j] * T + t];
          for (std::size_t k = 0; k < d; ++k) target[k] += scale * dpm[k];
        }
      }
    }
  }
}

void Model::baseline_backward(const ModelForward& fwd, const Vec& dposterior, std::vector<Vec>& dh1) {
  const std::size_t J = cfg_.joints;
  const std::size_t T = cfg_.frames;
  const std::size_t d = cfg_.hidden;
  const BaselineForward& b = fwd.baseline;

  const Vec dlogits = softmax_backward(fwd.posterior, dposterior);
  ParamTensor& Wc = store_.get("cls.W");
  outer_add(Wc.grad, dlogits.data(), b.dropped_global.data());
  add_to(store_.get("cls.b").grad.data, dlogits);
  Vec dglobal(d, 0.0);
  matvec_transpose_add(Wc.value, dlogits.data(), dglobal.data());
  if (!b.context_mask.empty()) mul_inplace(dglobal, b.context_mask);

  std::vector<Vec> dh2(J * T, Vec(d, 0.0));
  if (cfg_.variant == ModelVariant::baseline_global_2) {
    const double scale = 1.0 / static_cast<double>(J * T);
    for (auto& g : dh2) {
      for (std::size_t k = 0; k < d; ++k) g[k] = scale * dglobal[k];
    }
  } else {
    Vec dpre(d);
    for (std::size_t k = 0; k < d; ++k) {
      dpre[k] = dglobal[k] * (1.0 - b.global_repr[k] * b.global_repr[k]);
    }
    const Vec flat = b.layer2.concat_hidden();
    ParamTensor& Wh = store_.get("head.W");
    outer_add(Wh.grad, dpre.data(), flat.data());
    add_to(store_.get("head.b").grad.data, dpre);
    Vec dflat(flat.size(), 0.0);
    matvec_transpose_add(Wh.value, dpre.data(), dflat.data());
    for (std::size_t idx = 0; idx < J * T; ++idx) {
      for (std::size_t k = 0; k < d; ++k) dh2[idx][k] = dflat[idx * d + k];
    }
  }

  LatticeGrads lg = lattice_backward(store_.get("l2.W"), store_.get("l2.b"), b.layer2, dh2);
  for (std::size_t idx = 0; idx < J * T; ++idx) {
    Vec& dx = lg.dinput[idx];
    if (!b.input_mask.empty()) mul_inplace(dx, b.input_mask[idx]);
    add_to(dh1[idx], dx);
  }
}

double nll_loss(const Vec& posterior, std::size_t label) {
  if (label >= posterior.size()) {
    throw ContractError("nll_loss: label " + std::to_string(label) + " out of range for " +
                        std::to_string(posterior.size()) + " classes");
  }
  return -std::log(std::max(posterior[label], 1e-12));
}

}  // namespace gcalstm
