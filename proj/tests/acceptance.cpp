// Acceptance checks: one PASS / FAIL / SKIP line per criterion.
//
//   qnn_acceptance                      all criteria; training is SKIP unless
//                                       QNN_CIFAR10_DIR (or --cifar-dir) is set
//   qnn_acceptance --only training      training criterion only; exit 77 when
//                                       no CIFAR-10 directory is available
//   qnn_acceptance --synthetic-training the training protocol on synthetic
//                                       CIFAR-format data (timing, determinism)

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qnn/activations.hpp"
#include "qnn/ghr.hpp"
#include "qnn/gradcheck.hpp"
#include "qnn/model.hpp"
#include "qnn/quaternion.hpp"
#include "qnn/train.hpp"
#include "qnn/viz.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace qnn;
namespace fs = std::filesystem;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

struct Tally {
  int fail = 0;
  int skip = 0;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(Tally& tally, const std::string& name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {Status::Fail, std::string("exception: ") + e.what()};
  }
  const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
  if (o.status == Status::Fail) ++tally.fail;
  if (o.status == Status::Skip) ++tally.skip;
  std::printf("%s  %s: %s\n", tag, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

Outcome verdict(bool ok, const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return {ok ? Status::Pass : Status::Fail, buf};
}

double max_abs(const Quatd& q) {
  return std::max({std::abs(q.w), std::abs(q.x), std::abs(q.y), std::abs(q.z)});
}

Outcome algebra() {
  const auto t0 = Clock::now();
  bool table = true;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const auto e = oracle::unit_table(a, b);
      const Quatd p = hamilton(oracle::basis(a), oracle::basis(b));
      for (int c = 0; c < 4; ++c) table &= p[static_cast<std::size_t>(c)] == (c == e.unit ? e.sign : 0.0);
    }
  }
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> d(-10, 10);
  double worst_norm = 0, worst_conj = 0;
  for (int i = 0; i < 10000; ++i) {
    const Quatd p{d(rng), d(rng), d(rng), d(rng)};
    const Quatd q{d(rng), d(rng), d(rng), d(rng)};
    const Quatd pq = hamilton(p, q);
    const double np = norm(p) * norm(q);
    worst_norm = std::max(worst_norm, std::abs(norm(pq) - np) / np);
    worst_conj = std::max(worst_conj, max_abs(conj(pq) - hamilton(conj(q), conj(p))) / norm(pq));
  }
  const double t = seconds_since(t0);
  return verdict(table && worst_norm <= 1e-12 && worst_conj <= 1e-12 && t < 1.0,
                 "unit table %s, max rel norm err %.2e, max rel conj err %.2e (10k pairs), %.3f s",
                 table ? "exact" : "MISMATCH", worst_norm, worst_conj, t);
}

Outcome class_invariants() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::vector<Quatd> samples;
  for (int i = 0; i < 10000; ++i) samples.push_back(oracle::random_quaternion(rng, 0.1, 10, 1e-3));
  double worst_phase = 0, worst_ratio = 0, worst_mag = 0;
  for (auto conv : {AngleConvention::Psi, AngleConvention::Theta}) {
    for (auto kind : kQuaternionActivations) {
      for (const Quatd& q : samples) {
        const Quatd a = apply(kind, conv, q);
        if (activation_class(kind) == ActivationClass::Magnitude) {
          const double na = norm(a);
          if (na < 1e-200) continue;
          const double psi_q = std::atan2(std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z), q.w);
          const double psi_a = std::atan2(std::sqrt(a.x * a.x + a.y * a.y + a.z * a.z), a.w);
          worst_phase = std::max(worst_phase, std::abs(psi_a - psi_q));
          // a must be a positive multiple of q.
          const double lambda = (a.w * q.w + a.x * q.x + a.y * q.y + a.z * q.z) / (norm(q) * norm(q));
          worst_ratio = std::max(worst_ratio, norm(a - lambda * q) / na);
          if (lambda < 0) worst_ratio = std::max(worst_ratio, 1.0);
        } else {
          worst_mag = std::max(worst_mag, std::abs(norm(a) - norm(q)) / norm(q));
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return verdict(worst_phase <= 1e-9 && worst_ratio <= 1e-9 && worst_mag <= 1e-9 && t < 5.0,
                 "magnitude class: max phase dev %.2e, ratio dev %.2e; phase class: max rel magnitude dev "
                 "%.2e (10k samples x 9 kinds x psi/theta), %.3f s",
                 worst_phase, worst_ratio, worst_mag, t);
}

Outcome phase_sin_dual() {
  std::mt19937_64 rng(77);
  double worst = 0;
  int negative = 0;
  for (int i = 0; i < 10000; ++i) {
    const Quatd q = oracle::random_quaternion(rng, 0.1, 10, 1e-3);
    negative += q.w < 0;
    worst = std::max(worst, max_abs(apply(ActivationKind::PhaseSin, AngleConvention::Psi, q) -
                                    oracle::phase_sin_polar(q)));
  }
  return verdict(worst <= 1e-12 && negative > 1000,
                 "max abs deviation between component and polar forms %.2e over 10k samples (%d with Re < 0)",
                 worst, negative);
}

Outcome ghr_table() {
  const auto t0 = Clock::now();
  double worst = 0;
  for (auto kind : kQuaternionActivations) {
    std::mt19937_64 rng(1000 + static_cast<int>(kind));
    auto f = [kind](const Quatd& z) { return apply(kind, AngleConvention::Psi, z); };
    for (int i = 0; i < 1000; ++i) {
      const Quatd q = oracle::random_quaternion(rng, 0.1, 2.5, 0.1);
      const Quatd a = analytic_ghr(kind, q).value;
      const Quatd n = numeric_ghr(f, q, 1e-6).value;
      worst = std::max(worst, norm(a - n) / std::max(norm(a), 1.0));
    }
  }
  const double t = seconds_since(t0);
  return verdict(worst <= 1e-5 && t < 30.0,
                 "max rel error analytic vs finite-difference (h=1e-6) %.2e over 9 kinds x 1000 points, %.3f s",
                 worst, t);
}

Outcome reference_constants() {
  const double pi = std::numbers::pi;
  const double tanh_pi = output_phase(ActivationKind::PhaseTanh, AngleConvention::Psi, pi);
  const double shrink = output_phase(ActivationKind::PhaseTanhshrink, AngleConvention::Psi, pi);
  const double c = std::abs(std::cos(tanh_pi));
  return verdict(std::abs(tanh_pi - 0.9963) <= 5e-5 && std::abs(shrink - 2.1453) <= 5e-5 &&
                     std::abs(c - 0.543) <= 5e-4,
                 "PhaseTanh(pi) = %.6f, PhaseTanhshrink(pi) = %.6f, |cos(tanh(pi))| = %.6f", tanh_pi,
                 shrink, c);
}

Outcome cardioid_relu() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> d(-100, 100);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const double w = i == 0 ? 0.0 : d(rng);
    const Quatd a = apply(ActivationKind::Cardioid, AngleConvention::Psi, Quatd{w, 0, 0, 0});
    mismatches += !(a == Quatd{std::max(0.0, w), 0, 0, 0});
  }
  return verdict(mismatches == 0, "%d of 1000 real-axis points differ from max(0, w)", mismatches);
}

Outcome model_gradcheck() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::string worst_label;
  int cases = 0;
  for (auto kind : kAllActivations) {
    for (auto conv : {AngleConvention::Psi, AngleConvention::Theta}) {
      const auto r = gradcheck_conv_model(kind, conv, 1);
      ++cases;
      if (r.max_rel_error >= worst) {
        worst = r.max_rel_error;
        worst_label = r.label;
      }
    }
  }
  const double t = seconds_since(t0);
  return verdict(worst <= 1e-6 && t < 120.0,
                 "%d cases (11 kinds x psi/theta, 64-bit), max rel error %.2e (%s), %.2f s", cases, worst,
                 worst_label.c_str(), t);
}

Outcome parameter_counts() {
  const double s = static_cast<double>(ModelConfig::named("qvgg-s").parameter_count());
  const double v16 = static_cast<double>(ModelConfig::named("qvgg16").parameter_count());
  const double ds = std::abs(s - 0.33e6) / 0.33e6, d16 = std::abs(v16 - 3.8e6) / 3.8e6;
  return verdict(ds <= 0.03 && d16 <= 0.05, "qvgg-s %.0f (%.2f%% from 0.33M), qvgg16 %.0f (%.2f%% from 3.8M)",
                 s, 100 * ds, v16, 100 * d16);
}

Outcome viz_grids() {
  const MeshSpec spec = MeshSpec::value_defaults();
  double worst_unit = 0, worst_phase_class = 0, worst_identity = 0;
  for (const auto& r : emit_grid(ActivationKind::Norm, AngleConvention::Psi, spec, GridMode::Value)) {
    if (r.norm) worst_unit = std::max(worst_unit, std::abs(*r.norm - 1.0));
  }
  for (auto kind : kQuaternionActivations) {
    if (activation_class(kind) != ActivationClass::Phase) continue;
    for (auto conv : {AngleConvention::Psi, AngleConvention::Theta}) {
      for (const auto& r : emit_grid(kind, conv, spec, GridMode::Value)) {
        if (r.norm) {
          worst_phase_class =
              std::max(worst_phase_class, std::abs(*r.norm - std::sqrt(r.re * r.re + r.im * r.im)));
        }
      }
    }
  }
  for (const auto& r : emit_grid(std::nullopt, AngleConvention::Psi, spec, GridMode::Value)) {
    worst_identity = std::max(worst_identity, r.norm ? std::abs(*r.norm - std::sqrt(r.re * r.re + r.im * r.im))
                                                     : 1.0);
  }
  return verdict(worst_unit <= 1e-9 && worst_phase_class <= 1e-9 && worst_identity == 0.0,
                 "Norm grid max |norm - 1| %.2e, phase-class max |norm - |z|| %.2e, identity max dev %.1e",
                 worst_unit, worst_phase_class, worst_identity);
}

std::vector<std::string> csv_without_wall(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line[0] != '#') line = line.substr(0, line.rfind(','));
    out.push_back(line);
  }
  return out;
}

struct TrainingRun {
  std::vector<EpochMetrics> history;
  double seconds;
};

TrainingRun train_protocol(const fs::path& data_dir, const fs::path& out, std::size_t train_limit,
                           std::size_t test_limit, std::size_t epochs) {
  TrainConfig cfg;
  cfg.model = "qvgg-s";
  cfg.activation = "phase-sin";
  cfg.angle = "psi";
  cfg.dataset = "cifar10";
  cfg.data_dir = data_dir;
  cfg.epochs = epochs;
  cfg.train_limit = train_limit;
  cfg.test_limit = test_limit;
  cfg.dtype = "float32";
  cfg.seed = 0;
  cfg.out = out;
  const auto t0 = Clock::now();
  auto history = run_training(cfg);
  return {std::move(history), seconds_since(t0)};
}

// Full protocol: 5000 / 1000 images, 5 epochs, run twice with the same seed.
Outcome training_smoke(const fs::path& data_dir, const fs::path& work, bool repeat_full) {
  fs::create_directories(work);
  omp_set_num_threads(1);
  const auto a = train_protocol(data_dir, work / "a.csv", 5000, 1000, 5);
  const auto& h = a.history;
  const double first = h.front().train_loss, last = h.back().train_loss;
  const double reduction = 1.0 - last / first;
  bool same;
  if (repeat_full) {
    train_protocol(data_dir, work / "b.csv", 5000, 1000, 5);
    same = csv_without_wall(work / "a.csv") == csv_without_wall(work / "b.csv");
  } else {
    train_protocol(data_dir, work / "c.csv", 500, 100, 1);
    train_protocol(data_dir, work / "d.csv", 500, 100, 1);
    same = csv_without_wall(work / "c.csv") == csv_without_wall(work / "d.csv");
  }
  return verdict(h.back().test_acc > 30.0 && reduction >= 0.30 && a.seconds <= 1800.0 && same,
                 "final test acc %.3f%%, train loss %.4f -> %.4f (-%.1f%%), %.1f s for 5 epochs, "
                 "same-seed metrics %s (wall_seconds column excluded)%s",
                 h.back().test_acc, first, last, 100 * reduction, a.seconds, same ? "identical" : "DIFFER",
                 repeat_full ? "" : "; determinism on 500/100 images, 1 epoch");
}

std::string cifar_dir_from_env(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* env = std::getenv("QNN_CIFAR10_DIR");
  return env ? env : "";
}

constexpr const char* kTrainingName = "desk-scale training smoke (qvgg-s, CIFAR-10 5000/1000, 5 epochs)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string only, cifar_dir;
  bool synthetic_training = false;
  app.add_option("--only", only, "Run a single criterion")->check(CLI::IsMember({"training"}));
  app.add_option("--cifar-dir", cifar_dir, "CIFAR-10 binary batch directory");
  app.add_flag("--synthetic-training", synthetic_training,
               "Run the training protocol on synthetic CIFAR-format data");
  CLI11_PARSE(app, argc, argv);

  const fs::path work = fs::temp_directory_path() / "qnn_acceptance";
  Tally tally;

  if (synthetic_training) {
    const fs::path dir = work / "synthetic_cifar";
    synthetic::write_cifar_dir(dir, synthetic::separable(5000, 32, 1, 90), synthetic::separable(1000, 32, 2, 90));
    report(tally, "[synthetic stand-in, not CIFAR-10] training protocol",
           [&] { return training_smoke(dir, work / "synthetic_run", false); });
    return tally.fail ? 1 : 0;
  }

  if (only.empty()) {
    report(tally, "algebra suite", algebra);
    report(tally, "magnitude/phase class invariants", class_invariants);
    report(tally, "PhaseSin dual-form identity", phase_sin_dual);
    report(tally, "GHR derivative table vs finite differences", ghr_table);
    report(tally, "activation reference constants", reference_constants);
    report(tally, "Cardioid reduces to ReLU on the real axis", cardioid_relu);
    report(tally, "full-model gradient check", model_gradcheck);
    report(tally, "parameter counts", parameter_counts);
  }

  const std::string cifar = cifar_dir_from_env(cifar_dir);
  report(tally, kTrainingName, [&]() -> Outcome {
    if (cifar.empty()) {
      return {Status::Skip,
              "CIFAR-10 not available; set QNN_CIFAR10_DIR to the binary batch directory "
              "(synthetic stand-in: qnn_acceptance --synthetic-training)"};
    }
    if (only.empty()) return {Status::Skip, "runs in the acceptance_training test"};
    return training_smoke(cifar, work / "cifar_run", true);
  });

  if (only.empty()) report(tally, "viz grid regeneration", viz_grids);

  if (tally.fail) return 1;
  if (!only.empty() && tally.skip) return 77;
  return 0;
}
