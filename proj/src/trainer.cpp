#include "gcalstm/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>

#include "gcalstm/errors.hpp"

namespace gcalstm {

namespace {

std::string format_double(double v) {
  char tmp[32];
  auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  return std::string(tmp, res.ptr);
}

// Parameter value snapshot for best-checkpoint tracking.
std::vector<DenseMatrix> snapshot_values(const ParamStore& store) {
  std::vector<DenseMatrix> values;
  values.reserve(store.tensors().size());
  for (const auto& t : store.tensors()) values.push_back(t.value);
  return values;
}

void restore_values(ParamStore& store, const std::vector<DenseMatrix>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) store.tensors()[i].value = values[i];
}

struct ValMetrics {
  double loss = 0.0;
  double accuracy = 0.0;
};

ValMetrics validate_model(const Model& model, const std::vector<SkeletonSequence>& validation,
                          std::optional<std::size_t> supervise) {
  ValMetrics m;
  std::size_t correct = 0;
  for (const auto& seq : validation) {
    const ModelForward fwd = model.forward(seq, false, nullptr, supervise);
    m.loss += nll_loss(fwd.posterior, seq.label);
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(fwd.posterior.begin(), fwd.posterior.end()) - fwd.posterior.begin());
    if (pred == seq.label) ++correct;
  }
  m.loss /= static_cast<double>(validation.size());
  m.accuracy = static_cast<double>(correct) / static_cast<double>(validation.size());
  return m;
}

struct BestTracker {
  std::vector<DenseMatrix> values;
  std::size_t epoch = 0;
  double val_loss = 0.0;
  bool present = false;
};

// One training step: epochs until the validation metric stops improving for
// cfg.patience epochs or cfg.max_epochs is reached. When `best` is given, the
// best-validation parameter snapshot of this step is tracked in it. Returns
// false on divergence.
bool run_step(Model& model, const std::vector<SkeletonSequence>& train,
              const std::vector<SkeletonSequence>& validation, const TrainConfig& cfg,
              std::optional<std::size_t> supervise, std::size_t step_index, std::size_t& global_epoch,
              TrainReport& report, BestTracker* best) {
  const RngStream base(cfg.seed);
  double best_metric = 0.0;
  std::size_t epochs_since_best = 0;
  bool have_best = false;

  std::vector<std::size_t> indices(train.size());
  for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = i;

  for (std::size_t step_epoch = 0; step_epoch < cfg.max_epochs; ++step_epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = cfg.lr_at_epoch(global_epoch);

    RngStream shuffle_rng = base.fork(0x500000ULL + global_epoch);
    for (std::size_t i = indices.size(); i > 1; --i) {
      std::swap(indices[i - 1], indices[shuffle_rng.next_below(i)]);
    }
    RngStream dropout_rng = base.fork(0xd000000ULL + global_epoch);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < indices.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, indices.size());
      const double weight = 1.0 / static_cast<double>(end - start);
      model.params().zero_grads();
      for (std::size_t i = start; i < end; ++i) {
        const SkeletonSequence& seq = train[indices[i]];
        const ModelForward fwd = model.forward(seq, true, &dropout_rng, supervise);
        loss_sum += model.backward(fwd, seq.label, weight);
      }
      model.params().clip_grad_norm(cfg.clip_norm);
      try {
        model.params().sgd_step(lr, cfg.momentum);
      } catch (const DivergenceError&) {
        report.diverged = true;
        return false;
      }
    }
    const double train_loss = loss_sum / static_cast<double>(indices.size());
    if (!std::isfinite(train_loss)) {
      report.diverged = true;
      return false;
    }

    const ValMetrics val = validate_model(model, validation, supervise);
    EpochRecord rec;
    rec.epoch = global_epoch;
    rec.step = step_index;
    rec.lr = lr;
    rec.train_loss = train_loss;
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.epochs.push_back(rec);
    ++global_epoch;

    const double metric = cfg.monitor_error_rate ? 1.0 - val.accuracy : val.loss;
    if (!have_best || metric < best_metric) {
      best_metric = metric;
      have_best = true;
      epochs_since_best = 0;
      if (best) {
        best->values = snapshot_values(model.params());
        best->epoch = rec.epoch;
        best->val_loss = val.loss;
        best->present = true;
      }
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) break;
    }
  }
  return true;
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ContractError("TrainConfig: negative learning rate");
  if (decay_rate <= 0.0 || decay_rate > 1.0) throw ContractError("TrainConfig: decay rate must be in (0, 1]");
  if (momentum < 0.0 || momentum >= 1.0) throw ContractError("TrainConfig: momentum must be in [0, 1)");
  if (batch_size == 0) throw ContractError("TrainConfig: batch size must be positive");
  if (max_epochs == 0) throw ContractError("TrainConfig: max epochs must be positive");
  if (patience == 0) throw ContractError("TrainConfig: patience must be at least 1");
  if (clip_norm < 0.0) throw ContractError("TrainConfig: negative clip norm");
}

double TrainConfig::lr_at_epoch(std::size_t epoch) const {
  return learning_rate * std::pow(decay_rate, static_cast<double>(epoch));
}

EvalResult evaluate(const Model& model, const std::vector<SkeletonSequence>& sequences) {
  if (sequences.empty()) throw ContractError("evaluate: empty sequence set");
  const std::size_t classes = model.config().classes;
  EvalResult result;
  result.confusion = DenseMatrix(classes, classes);
  std::size_t correct = 0;
  for (const auto& seq : sequences) {
    const ModelForward fwd = model.forward(seq);
    result.mean_loss += nll_loss(fwd.posterior, seq.label);
    const std::size_t pred = static_cast<std::size_t>(
        std::max_element(fwd.posterior.begin(), fwd.posterior.end()) - fwd.posterior.begin());
    result.confusion.at(seq.label, pred) += 1.0;
    if (pred == seq.label) ++correct;
  }
  result.mean_loss /= static_cast<double>(sequences.size());
  result.accuracy = static_cast<double>(correct) / static_cast<double>(sequences.size());
  return result;
}

TrainReport train_direct(Model& model, const std::vector<SkeletonSequence>& train,
                         const std::vector<SkeletonSequence>& validation, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || validation.empty()) throw ContractError("train_direct: empty dataset");

  TrainReport report;
  report.step_boundaries.push_back(0);
  model.params().set_all_trainable(true);

  std::size_t global_epoch = 0;
  BestTracker best;
  run_step(model, train, validation, cfg, std::nullopt, 0, global_epoch, report, &best);
  if (best.present) {
    restore_values(model.params(), best.values);
    report.best_epoch = best.epoch;
    report.best_val_loss = best.val_loss;
  }
  return report;
}

TrainReport train_stepwise(Model& model, const std::vector<SkeletonSequence>& train,
                           const std::vector<SkeletonSequence>& validation, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty() || validation.empty()) throw ContractError("train_stepwise: empty dataset");

  const std::size_t steps = model.config().is_baseline() ? 0 : model.config().attention.iterations;
  TrainReport report;
  std::size_t global_epoch = 0;

  for (std::size_t n = 0; n <= steps; ++n) {
    report.step_boundaries.push_back(global_epoch);
    model.params().set_trainable_up_to_iteration(static_cast<int>(n));
    const std::optional<std::size_t> supervise =
        model.config().is_baseline() ? std::nullopt : std::optional<std::size_t>(n);
    BestTracker best;
    const bool final_step = n == steps;
    if (!run_step(model, train, validation, cfg, supervise, n, global_epoch, report,
                  final_step ? &best : nullptr)) {
      model.params().set_all_trainable(true);
      return report;
    }
    if (final_step && best.present) {
      restore_values(model.params(), best.values);
      report.best_epoch = best.epoch;
      report.best_val_loss = best.val_loss;
    }
  }
  model.params().set_all_trainable(true);
  return report;
}

double attention_mass_on_joints(const AttentionMap& joint_space_map,
                                const std::vector<std::size_t>& joints) {
  const DenseMatrix& scores = joint_space_map.scores;
  if (scores.rows == 0 || scores.cols == 0) throw ContractError("attention_mass_on_joints: empty map");
  for (std::size_t j : joints) {
    if (j >= scores.rows) throw ContractError("attention_mass_on_joints: joint index out of range");
  }
  double mean = 0.0;
  for (std::size_t t = 0; t < scores.cols; ++t) {
    double frame_total = 0.0;
    double frame_informative = 0.0;
    for (std::size_t j = 0; j < scores.rows; ++j) frame_total += scores.at(j, t);
    for (std::size_t j : joints) frame_informative += scores.at(j, t);
    mean += frame_informative / frame_total;
  }
  return mean / static_cast<double>(scores.cols);
}

void TrainReport::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write train report: " + path);
  out << "# train report\n";
  for (std::size_t i = 0; i < step_boundaries.size(); ++i) {
    out << "step " << i << " start_epoch " << step_boundaries[i] << "\n";
  }
  for (const auto& rec : epochs) {
    out << "epoch " << rec.epoch << " step " << rec.step << " lr " << format_double(rec.lr)
        << " train_loss " << format_double(rec.train_loss) << " val_loss " << format_double(rec.val_loss)
        << " val_acc " << format_double(rec.val_accuracy) << "\n";
  }
  out << "best_epoch " << best_epoch << " best_val_loss " << format_double(best_val_loss) << "\n";
  if (final_test_accuracy >= 0.0) {
    out << "final_test_accuracy " << format_double(final_test_accuracy) << "\n";
  }
  out << "diverged " << (diverged ? 1 : 0) << "\n";
}

void TrainReport::save_timing(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write timing file: " + path);
  for (const auto& rec : epochs) {
    out << "epoch " << rec.epoch << " wall_s " << format_double(rec.wall_seconds) << "\n";
  }
}

void EvalResult::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics file: " + path);
  out << "accuracy " << format_double(accuracy) << "\n";
  out << "mean_loss " << format_double(mean_loss) << "\n";
  out << "confusion_rows_true\n";
  for (std::size_t r = 0; r < confusion.rows; ++r) {
    for (std::size_t c = 0; c < confusion.cols; ++c) {
      if (c) out << ' ';
      out << static_cast<long long>(confusion.at(r, c));
    }
    out << '\n';
  }
}

}  // namespace gcalstm
