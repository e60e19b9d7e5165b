#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "qcdkit/em.hpp"
#include "qcdkit/errors.hpp"
#include "qcdkit/experiment.hpp"
#include "qcdkit/harness.hpp"
#include "qcdkit/kl.hpp"
#include "qcdkit/metrics.hpp"
#include "qcdkit/stream.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

qcd::DetectorConfig detector_config(const std::string& text) {
    return qcd::DetectorConfig::from_json(json::parse(text));
}

qcd::ChangeScenario scenario(const std::string& text) {
    return qcd::ChangeScenario::from_json(json::parse(text));
}

qcd::EvalOptions options(std::uint64_t trials, std::uint64_t horizon, unsigned workers) {
    qcd::EvalOptions o;
    o.trials = trials;
    o.horizon = horizon;
    o.workers = workers;
    return o;
}

qcd::TrajectoryPair pair_from(const std::vector<std::pair<double, double>>& predicted,
                              const std::vector<std::pair<double, double>>& truth) {
    auto to_points = [](const std::vector<std::pair<double, double>>& raw) {
        std::vector<qcd::Point2> points;
        points.reserve(raw.size());
        for (const auto& [x, y] : raw) {
            points.push_back({x, y});
        }
        return points;
    };
    return {to_points(predicted), to_points(truth)};
}

}  // namespace

PYBIND11_MODULE(_qcdkit, m) {
    m.doc() = "Streaming change detection over prediction-error streams";

    py::register_exception<qcd::Error>(m, "QcdError", PyExc_RuntimeError);

    py::class_<qcd::Gaussian>(m, "Gaussian")
        .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
        .def_readonly("mean", &qcd::Gaussian::mean)
        .def_readonly("variance", &qcd::Gaussian::variance)
        .def("pdf", &qcd::Gaussian::pdf)
        .def("log_pdf", &qcd::Gaussian::log_pdf)
        .def("__repr__", [](const qcd::Gaussian& g) {
            return "Gaussian(mean=" + std::to_string(g.mean) +
                   ", variance=" + std::to_string(g.variance) + ")";
        });

    py::class_<qcd::MomentSummary>(m, "MomentSummary")
        .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
        .def_readonly("mean", &qcd::MomentSummary::mean)
        .def_readonly("variance", &qcd::MomentSummary::variance);

    py::class_<qcd::GaussianMixture>(m, "GaussianMixture")
        .def(py::init([](const std::vector<std::tuple<double, double, double>>& components) {
                 std::vector<qcd::GaussianMixture::Component> built;
                 for (const auto& [weight, mean, variance] : components) {
                     built.push_back({weight, qcd::Gaussian(mean, variance)});
                 }
                 return qcd::GaussianMixture(std::move(built));
             }),
             py::arg("components"), "components: list of (weight, mean, variance) tuples")
        .def_static("single", &qcd::GaussianMixture::single, py::arg("mean"), py::arg("variance"))
        .def("pdf", &qcd::GaussianMixture::pdf)
        .def("log_pdf", &qcd::GaussianMixture::log_pdf)
        .def("moments", &qcd::GaussianMixture::moments)
        .def("shifted", &qcd::GaussianMixture::shifted, py::arg("delta"))
        .def("sample",
             [](const qcd::GaussianMixture& mixture, std::uint64_t seed, std::size_t n) {
                 return qcd::sample(mixture, seed, n);
             },
             py::arg("seed"), py::arg("n"))
        .def("components",
             [](const qcd::GaussianMixture& mixture) {
                 std::vector<std::tuple<double, double, double>> raw;
                 for (const auto& c : mixture.components()) {
                     raw.emplace_back(c.weight, c.gaussian.mean, c.gaussian.variance);
                 }
                 return raw;
             })
        .def("to_json", [](const qcd::GaussianMixture& mixture) { return mixture.to_json().dump(); })
        .def_static("from_json", [](const std::string& text) {
            return qcd::GaussianMixture::from_json(json::parse(text));
        });

    py::class_<qcd::EmFit>(m, "EmFit")
        .def_readonly("mixture", &qcd::EmFit::mixture)
        .def_readonly("log_likelihood", &qcd::EmFit::log_likelihood)
        .def_readonly("iterations", &qcd::EmFit::iterations)
        .def_readonly("converged", &qcd::EmFit::converged);

    m.def("fit_em",
          [](const std::vector<double>& data, std::size_t k, std::size_t max_iterations,
             double tolerance, double variance_floor) {
              qcd::EmConfig config{max_iterations, tolerance, variance_floor};
              return qcd::fit_em(data, k, config);
          },
          py::arg("data"), py::arg("k") = 2, py::arg("max_iterations") = 500,
          py::arg("tolerance") = 1e-8, py::arg("variance_floor") = 1e-6);

    py::class_<qcd::KlEstimate>(m, "KlEstimate")
        .def_readonly("value", &qcd::KlEstimate::value)
        .def_readonly("std_error", &qcd::KlEstimate::std_error)
        .def_readonly("samples", &qcd::KlEstimate::samples);

    m.def("kl_mc", &qcd::kl_mc, py::arg("p"), py::arg("q"), py::arg("n"), py::arg("seed"));
    m.def("kl_gaussian", &qcd::kl_gaussian, py::arg("p"), py::arg("q"));
    m.def("kl", &qcd::kl, py::arg("p"), py::arg("q"), py::arg("n"), py::arg("seed"));

    py::class_<qcd::DetectorState>(m, "DetectorState")
        .def_readonly("statistic", &qcd::DetectorState::statistic)
        .def_readonly("threshold", &qcd::DetectorState::threshold)
        .def_readonly("time", &qcd::DetectorState::time)
        .def_readonly("alarmed", &qcd::DetectorState::alarmed)
        .def_readonly("stopping_time", &qcd::DetectorState::stopping_time);

    py::class_<qcd::Detector>(m, "Detector")
        .def(py::init([](const std::string& config) {
                 return qcd::Detector(detector_config(config));
             }),
             py::arg("config_json"))
        .def("step", &qcd::Detector::step, py::arg("x"),
             py::return_value_policy::copy)
        .def("reset", &qcd::Detector::reset)
        .def_property_readonly("state", &qcd::Detector::state,
                               py::return_value_policy::copy)
        .def("process",
             [](qcd::Detector& detector, const std::vector<double>& stream) {
                 std::optional<std::uint64_t> tau;
                 for (double x : stream) {
                     if (detector.step(x).alarmed) {
                         tau = detector.state().stopping_time;
                         break;
                     }
                 }
                 return tau;
             },
             py::arg("stream"), "Feed samples until an alarm; returns the stopping time or None");

    m.def("threshold_for_far", &qcd::threshold_for_far, py::arg("alpha"));
    m.def("log_likelihood_ratio",
          [](const std::string& config, double x) {
              return qcd::log_likelihood_ratio(detector_config(config).build_model(), x);
          },
          py::arg("config_json"), py::arg("x"));

    m.def("ade", [](const std::vector<std::pair<double, double>>& predicted,
                    const std::vector<std::pair<double, double>>& truth) {
        return qcd::ade(pair_from(predicted, truth));
    });
    m.def("fde", [](const std::vector<std::pair<double, double>>& predicted,
                    const std::vector<std::pair<double, double>>& truth) {
        return qcd::fde(pair_from(predicted, truth));
    });
    m.def("rmse", [](const std::vector<std::pair<double, double>>& predicted,
                     const std::vector<std::pair<double, double>>& truth) {
        return qcd::rmse(pair_from(predicted, truth));
    });

    m.def("generate_stream",
          [](const std::string& scenario_json, std::uint64_t seed) {
              return qcd::generate(scenario(scenario_json), seed);
          },
          py::arg("scenario_json"), py::arg("seed"));
    m.def("read_error_stream_csv", &qcd::read_error_stream_csv, py::arg("path"));
    m.def("read_trajectory_csv",
          [](const std::filesystem::path& path) {
              std::vector<std::pair<std::vector<std::pair<double, double>>,
                                    std::vector<std::pair<double, double>>>>
                  scenes;
              for (const auto& pair : qcd::read_trajectory_csv(path)) {
                  auto flatten = [](const std::vector<qcd::Point2>& points) {
                      std::vector<std::pair<double, double>> raw;
                      raw.reserve(points.size());
                      for (const auto& p : points) {
                          raw.emplace_back(p.x, p.y);
                      }
                      return raw;
                  };
                  scenes.emplace_back(flatten(pair.predicted), flatten(pair.truth));
              }
              return scenes;
          },
          py::arg("path"), "One (predicted, truth) pair of point lists per scene");

    py::class_<qcd::Estimate>(m, "Estimate")
        .def_readonly("value", &qcd::Estimate::value)
        .def_readonly("std_error", &qcd::Estimate::std_error)
        .def_readonly("trials", &qcd::Estimate::trials)
        .def_readonly("censored", &qcd::Estimate::censored)
        .def_readonly("lower_bound", &qcd::Estimate::lower_bound);

    m.def("estimate_wadd",
          [](const std::string& config, const std::string& scenario_json, std::uint64_t trials,
             std::uint64_t horizon, unsigned workers, std::uint64_t seed) {
              return qcd::estimate_wadd(detector_config(config), scenario(scenario_json),
                                        options(trials, horizon, workers), seed);
          },
          py::arg("config_json"), py::arg("scenario_json"), py::arg("trials"),
          py::arg("horizon"), py::arg("workers"), py::arg("seed"));
    m.def("estimate_mtfa",
          [](const std::string& config, const std::string& scenario_json, std::uint64_t trials,
             std::uint64_t horizon, unsigned workers, std::uint64_t seed) {
              return qcd::estimate_mtfa(detector_config(config), scenario(scenario_json),
                                        options(trials, horizon, workers), seed);
          },
          py::arg("config_json"), py::arg("scenario_json"), py::arg("trials"),
          py::arg("horizon"), py::arg("workers"), py::arg("seed"));
    m.def("calibrate_threshold",
          [](const std::string& config, double target_mtfa, const std::string& scenario_json,
             std::uint64_t trials, std::uint64_t seed) {
              qcd::CalibrationOptions calib;
              calib.trials = trials;
              return qcd::calibrate_threshold(detector_config(config), target_mtfa,
                                              scenario(scenario_json), calib, seed);
          },
          py::arg("config_json"), py::arg("target_mtfa"), py::arg("scenario_json"),
          py::arg("trials"), py::arg("seed"));

    py::class_<qcd::SweepPoint>(m, "SweepPoint")
        .def_readonly("threshold", &qcd::SweepPoint::threshold)
        .def_readonly("mtfa", &qcd::SweepPoint::mtfa)
        .def_readonly("wadd", &qcd::SweepPoint::wadd);

    m.def("sweep_detector",
          [](const std::string& config, const std::string& scenario_json,
             const std::vector<double>& thresholds, std::uint64_t trials, std::uint64_t horizon,
             unsigned workers, std::uint64_t seed) {
              return qcd::sweep_detector(detector_config(config), scenario(scenario_json),
                                         thresholds, options(trials, horizon, workers), seed);
          },
          py::arg("config_json"), py::arg("scenario_json"), py::arg("thresholds"),
          py::arg("trials"), py::arg("horizon"), py::arg("workers"), py::arg("seed"));

    py::class_<qcd::CorrectnessReport>(m, "CorrectnessReport")
        .def_readonly("pre_change_expectation", &qcd::CorrectnessReport::pre_change_expectation)
        .def_readonly("post_change_expectation", &qcd::CorrectnessReport::post_change_expectation)
        .def_readonly("pre_variance", &qcd::CorrectnessReport::pre_variance)
        .def_readonly("post_variance", &qcd::CorrectnessReport::post_variance)
        .def_readonly("correct", &qcd::CorrectnessReport::correct);

    m.def("correctness_report",
          [](const std::string& config, const std::string& scenario_json, std::size_t n,
             std::uint64_t seed) {
              return qcd::correctness_report(detector_config(config).build_model(),
                                             scenario(scenario_json), n, seed);
          },
          py::arg("config_json"), py::arg("scenario_json"), py::arg("n"), py::arg("seed"));

    py::class_<qcd::RobustShiftRow>(m, "RobustShiftRow")
        .def_readonly("shift", &qcd::RobustShiftRow::shift)
        .def_readonly("detection_rate", &qcd::RobustShiftRow::detection_rate)
        .def_readonly("mean_delay", &qcd::RobustShiftRow::mean_delay)
        .def_readonly("detections", &qcd::RobustShiftRow::detections);

    m.def("robust_shift_study",
          [](const qcd::GaussianMixture& pre, double true_shift,
             const std::vector<double>& shifts, double threshold, std::uint64_t trials,
             std::uint64_t horizon, std::uint64_t seed) {
              return qcd::robust_shift_study(pre, true_shift, shifts, threshold,
                                             options(trials, horizon, 0), seed);
          },
          py::arg("pre"), py::arg("true_shift"), py::arg("shifts"), py::arg("threshold"),
          py::arg("trials"), py::arg("horizon"), py::arg("seed"));

    m.attr("__version__") = "0.1.0";
}
