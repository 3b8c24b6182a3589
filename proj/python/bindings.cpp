// Python bindings: paired tests on numpy panels or CSV files, the simulation
// DGP and the Monte Carlo experiments. Reports and specs cross the boundary
// as plain dicts (JSON).

#include "funcmax/bootstrap.hpp"
#include "funcmax/errors.hpp"
#include "funcmax/experiments.hpp"
#include "funcmax/parallel.hpp"
#include "funcmax/sample.hpp"
#include "funcmax/simulation.hpp"
#include "funcmax/statistics.hpp"

#include <nlohmann/json.hpp>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>

namespace py = pybind11;
using namespace funcmax;

namespace {

using Array3 = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Panel to_panel(const Array3& a) {
    if (a.ndim() != 3) throw DomainError("expected an array of shape (n, K, T)");
    Panel p(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
            static_cast<std::size_t>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), p.data().begin());
    return p;
}

py::array_t<double> to_array(const Panel& p) {
    py::array_t<double> out({p.subjects(), p.channels(), p.times()});
    std::copy(p.data().begin(), p.data().end(), out.mutable_data());
    return out;
}

StatisticKind select_kind(const std::string& method, std::size_t times, std::size_t projection_r) {
    switch (parse_statistic_tag(method)) {
        case StatisticKind::Tag::proposed: return StatisticKind::proposed();
        case StatisticKind::Tag::max: return StatisticKind::max();
        case StatisticKind::Tag::projection:
            return StatisticKind::projection(default_projection_basis(times, projection_r));
    }
    throw MethodError("unknown method");
}

py::object run_test(const DifferenceMatrix& z, const std::vector<std::string>& labels, double gamma, std::size_t draws,
                    std::uint64_t seed, const std::string& method, std::size_t projection_r, unsigned threads) {
    const StatisticKind kind = select_kind(method, z.times(), projection_r);
    TestReport report;
    {
        py::gil_scoped_release release;
        const auto dist = run_bootstrap(z, kind, MultiplierPlan{z.subjects(), draws, seed}, false, resolve_threads(threads));
        report = decide(compute_stats(z, kind), dist, gamma);
    }
    return to_python(to_json(report, labels));
}

py::tuple stats_tuple(const ChannelStats& s) { return py::make_tuple(s.global, py::array(py::cast(s.per_channel))); }

py::list results_list(const std::vector<CellResult>& rs) {
    py::list out;
    for (const auto& r : rs) {
        py::dict d;
        d["method"] = r.method;
        d["noise"] = std::string(noise_name(r.noise));
        d["n"] = r.n;
        d["K"] = r.channels;
        d["T"] = r.times;
        d["rho"] = r.rho;
        d["s"] = r.sparsity;
        d["delta"] = r.delta;
        d["gamma"] = r.gamma;
        d["runs"] = r.runs;
        d["N"] = r.draws;
        d["rejections"] = r.rejections;
        d["rate"] = r.rate;
        d["mc_stderr"] = r.mc_stderr;
        d["seed"] = r.seed;
        out.append(d);
    }
    return out;
}

template <class Fn>
py::list run_experiment(const py::dict& spec, unsigned threads, Fn fn) {
    const ExperimentSpec parsed = parse_experiment_spec(from_python(spec));
    std::vector<CellResult> rs;
    {
        py::gil_scoped_release release;
        rs = fn(parsed, resolve_threads(threads));
    }
    return results_list(rs);
}

}  // namespace

PYBIND11_MODULE(funcmax, m) {
    m.doc() = "Max-L2 multiplier-bootstrap tests for paired multi-channel functional data";

    auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<IngestError>(m, "IngestError", base.ptr());
    py::register_exception<GridMismatch>(m, "GridMismatch", base.ptr());
    py::register_exception<GridError>(m, "GridError", base.ptr());
    py::register_exception<BasisError>(m, "BasisError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<MethodError>(m, "MethodError", base.ptr());
    py::register_exception<SpecError>(m, "SpecError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def(
        "test",
        [](const Array3& x, const Array3& y, double gamma, std::size_t draws, std::uint64_t seed, const std::string& method,
           std::size_t projection_r, unsigned threads) {
            PairedFunctionalSample s;
            s.x = to_panel(x);
            s.y = to_panel(y);
            s.grid_x = s.grid_y = TimeGrid::uniform(s.x.times());
            return run_test(difference(s), {}, gamma, draws, seed, method, projection_r, threads);
        },
        py::arg("x"), py::arg("y"), py::arg("gamma") = 0.05, py::arg("draws") = 300, py::arg("seed") = 0,
        py::arg("method") = "proposed", py::arg("projection_r") = 10, py::arg("threads") = 1,
        "Tests equal functional means of paired panels x, y of shape (n, K, T) on t = l/T. Returns the report dict.");

    m.def(
        "test_csv",
        [](const std::string& x_path, const std::string& y_path, double gamma, std::size_t draws, std::uint64_t seed,
           const std::string& method, std::size_t projection_r, bool async, unsigned threads) {
            const auto sample = ingest_csv(x_path, y_path);
            const auto z = async ? async_difference(sample) : difference(sample);
            return run_test(z, sample.channel_labels, gamma, draws, seed, method, projection_r, threads);
        },
        py::arg("x_path"), py::arg("y_path"), py::arg("gamma") = 0.05, py::arg("draws") = 300, py::arg("seed") = 0,
        py::arg("method") = "proposed", py::arg("projection_r") = 10, py::arg("async_grids") = false,
        py::arg("threads") = 1);

    m.def(
        "read_csv",
        [](const std::string& x_path, const std::string& y_path) {
            const auto s = ingest_csv(x_path, y_path);
            py::dict d;
            d["x"] = to_array(s.x);
            d["y"] = to_array(s.y);
            d["grid_x"] = std::vector<double>(s.grid_x.points().begin(), s.grid_x.points().end());
            d["grid_y"] = std::vector<double>(s.grid_y.points().begin(), s.grid_y.points().end());
            d["channels"] = s.channel_labels;
            d["subjects"] = s.subject_ids;
            return d;
        },
        py::arg("x_path"), py::arg("y_path"));

    m.def(
        "statistic",
        [](const Array3& z, const std::string& method, std::size_t projection_r) {
            const DifferenceMatrix dm(to_panel(z), TimeGrid::uniform(static_cast<std::size_t>(z.shape(2))));
            return stats_tuple(compute_stats(dm, select_kind(method, dm.times(), projection_r)));
        },
        py::arg("z"), py::arg("method") = "proposed", py::arg("projection_r") = 10,
        "(global, per_channel) statistic of differences z with shape (n, K, T).");

    m.def("ecdf_tail", [](const std::vector<double>& draws, double t) { return ecdf_tail(draws, t); },
          py::arg("draws"), py::arg("t"));
    m.def("bootstrap_quantile",
          [](const std::vector<double>& draws, double gamma) { return bootstrap_quantile(draws, gamma); },
          py::arg("draws"), py::arg("gamma"));

    m.def(
        "equicorrelation_root",
        [](std::size_t channels, double rho) {
            const auto r = equicorrelation_root(channels, rho);
            return py::make_tuple(r.a, r.b);
        },
        py::arg("K"), py::arg("rho"));

    m.def(
        "simulate",
        [](const py::dict& config, std::uint64_t run_index) {
            const DgpConfig cfg = from_python(config).get<DgpConfig>().resolved();
            return to_array(generate(cfg, run_index).z());
        },
        py::arg("config"), py::arg("run_index") = 0,
        "Simulated differences of shape (n, K, T) for a DGP config dict (keys n, K, T, alpha, rho, noise, s, delta, seed).");

    m.def("run_level", [](const py::dict& spec, unsigned threads) { return run_experiment(spec, threads, run_level); },
          py::arg("spec"), py::arg("threads") = 1);
    m.def("run_power", [](const py::dict& spec, unsigned threads) { return run_experiment(spec, threads, run_power); },
          py::arg("spec"), py::arg("threads") = 1);
    m.def("run_fwer",
          [](const py::dict& spec, unsigned threads) { return run_experiment(spec, threads, run_channelwise_fwer); },
          py::arg("spec"), py::arg("threads") = 1);

    m.attr("REPORT_SCHEMA") = kReportSchema;
}
