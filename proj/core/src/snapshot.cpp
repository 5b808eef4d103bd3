#include "funflow/snapshot.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "funflow/errors.hpp"

namespace funflow {

namespace {

using nlohmann::json;

constexpr std::string_view kStateFormat = "funflow.query_state";
constexpr std::string_view kSemiNormFormat = "funflow.seminorm";

std::string fnv1a64(std::string_view data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json seminorm_payload(const FittedSemiNorm& s) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < s.embedding().rows(); ++r) rows.push_back(vector_json(s.embedding().row(r).transpose()));
    json dirs = json::array();
    for (const auto& d : s.directions()) dirs.push_back(vector_json(d.values()));
    return {{"kind", std::string(seminorm_kind_name(s.spec().kind))},
            {"count", s.spec().count},
            {"center", s.spec().center},
            {"grid_points", s.grid().size()},
            {"embedding", std::move(rows)},
            {"directions", std::move(dirs)},
            {"eigenvalues", vector_json(s.eigenvalues())}};
}

FittedSemiNorm seminorm_from(const json& p) {
    SemiNormSpec spec = SemiNormSpec::parse(p.at("kind").get<std::string>());
    spec.count = p.at("count").get<std::size_t>();
    spec.center = p.at("center").get<bool>();
    const Grid grid(p.at("grid_points").get<std::size_t>());
    const auto& rows = p.at("embedding");
    Eigen::MatrixXd e(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto row = vector_from(rows[r]);
        require(static_cast<std::size_t>(row.size()) == grid.size(), ErrorCode::integrity, "embedding row length");
        e.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    std::vector<Curve> dirs;
    for (const auto& d : p.at("directions")) dirs.emplace_back(grid, vector_from(d));
    return FittedSemiNorm(spec, grid, std::move(e), std::move(dirs), vector_from(p.at("eigenvalues")));
}

std::string wrap(std::string_view format, json payload) {
    const std::string body = payload.dump();
    json doc = {{"format", format}, {"version", kSnapshotVersion}, {"checksum", fnv1a64(body)}, {"payload", std::move(payload)}};
    return doc.dump(1) + "\n";
}

json unwrap(std::string_view text, std::string_view format) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::integrity, std::string("snapshot is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format") || !doc.contains("payload") || !doc.contains("version") ||
        !doc.contains("checksum")) {
        fail(ErrorCode::integrity, "snapshot is missing required fields");
    }
    if (doc.at("format") != format)
        fail(ErrorCode::integrity, "expected a " + std::string(format) + " snapshot, got " + doc.at("format").dump());
    if (doc.at("version") != kSnapshotVersion) {
        fail(ErrorCode::snapshot_version, "snapshot version " + doc.at("version").dump() + " is not supported (expected " +
                                              std::to_string(kSnapshotVersion) + ")");
    }
    auto payload = doc.at("payload");
    if (doc.at("checksum") != fnv1a64(payload.dump())) fail(ErrorCode::integrity, "snapshot checksum mismatch");
    return payload;
}

template <class F>
auto guarded(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        fail(ErrorCode::integrity, std::string("malformed snapshot: ") + e.what());
    }
}

}  // namespace

std::string serialize_seminorm(const FittedSemiNorm& s) { return wrap(kSemiNormFormat, seminorm_payload(s)); }

FittedSemiNorm deserialize_seminorm(std::string_view text) {
    const auto payload = unwrap(text, kSemiNormFormat);
    return guarded([&] { return seminorm_from(payload); });
}

std::string serialize_state(const QueryState& state) {
    const auto& acc = state.accumulator();
    const auto& plan = acc.plan();
    json history = json::array();
    for (const auto& o : acc.history()) history.push_back({o.distance, o.response, o.bandwidth});
    const auto s = acc.sums();
    json payload = {
        {"query", vector_json(state.query().values())},
        {"seminorm", seminorm_payload(state.seminorm())},
        {"kernel", {{"name", std::string(acc.kernel().name())}, {"scale", acc.kernel().scale()}}},
        {"ell", acc.ell()},
        {"plan",
         {{"C", plan.C},
          {"nu", plan.nu},
          {"mode", std::string(scale_mode_name(plan.mode))},
          {"scale", plan.scale ? json(*plan.scale) : json(nullptr)}}},
        {"cdf_policy", std::string(cdf_policy_name(acc.policy()))},
        {"cdf_reference", acc.cdf_reference()},
        {"n", acc.size()},
        {"history", std::move(history)},
        {"sorted_distances", acc.sorted_distances().to_vector()},
        {"running_scale", acc.running_scale()},
        {"sums",
         {{"num", s.num},
          {"den", s.den},
          {"wsum", s.wsum},
          {"num_unw", s.num_unw},
          {"num2_unw", s.num2_unw},
          {"den_unw", s.den_unw},
          {"m1_sum", s.m1_sum},
          {"m2_sum", s.m2_sum},
          {"beta_sum", s.beta_sum},
          {"zero_cdf", s.zero_cdf}}},
    };
    return wrap(kStateFormat, std::move(payload));
}

QueryState deserialize_state(std::string_view text) {
    const auto p = unwrap(text, kStateFormat);
    return guarded([&] {
        auto seminorm = std::make_shared<const FittedSemiNorm>(seminorm_from(p.at("seminorm")));
        Curve query(seminorm->grid(), vector_from(p.at("query")));
        Kernel kernel(Kernel::parse(p.at("kernel").at("name").get<std::string>()).kind(),
                      p.at("kernel").at("scale").get<double>());
        const auto& pj = p.at("plan");
        BandwidthPlan plan;
        plan.C = pj.at("C").get<double>();
        plan.nu = pj.at("nu").get<double>();
        const auto mode = pj.at("mode").get<std::string>();
        require(mode == "frozen" || mode == "running", ErrorCode::integrity, "unknown scale mode " + mode);
        plan.mode = mode == "frozen" ? ScaleMode::frozen : ScaleMode::running;
        if (!pj.at("scale").is_null()) plan.scale = pj.at("scale").get<double>();
        const auto policy_name = p.at("cdf_policy").get<std::string>();
        require(policy_name == "frozen" || policy_name == "refresh", ErrorCode::integrity,
                "unknown CDF policy " + policy_name);
        const auto policy = policy_name == "frozen" ? CdfPolicy::frozen : CdfPolicy::refresh;

        std::vector<RecursiveAccumulator::Observation> history;
        for (const auto& o : p.at("history")) {
            require(o.is_array() && o.size() == 3, ErrorCode::integrity, "malformed history entry");
            history.push_back({o[0].get<double>(), o[1].get<double>(), o[2].get<double>()});
        }
        require(p.at("n").get<std::size_t>() == history.size(), ErrorCode::integrity, "observation count mismatch");
        const auto& sj = p.at("sums");
        const RecursiveAccumulator::Sums sums{sj.at("num").get<double>(),      sj.at("den").get<double>(),
                                              sj.at("wsum").get<double>(),     sj.at("num_unw").get<double>(),
                                              sj.at("num2_unw").get<double>(), sj.at("den_unw").get<double>(),
                                              sj.at("m1_sum").get<double>(),   sj.at("m2_sum").get<double>(),
                                              sj.at("beta_sum").get<double>(), sj.at("zero_cdf").get<std::size_t>()};
        auto acc = RecursiveAccumulator::restore(p.at("ell").get<double>(), kernel, plan, policy,
                                                 p.at("cdf_reference").get<std::vector<double>>(), std::move(history),
                                                 p.at("running_scale").get<double>(), sums);
        require(acc.sorted_distances().to_vector() == p.at("sorted_distances").get<std::vector<double>>(),
                ErrorCode::integrity, "sorted distances disagree with the history");
        return QueryState(std::move(query), std::move(seminorm), std::move(acc));
    });
}

void save_state(const std::filesystem::path& path, const QueryState& state) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write snapshot " + path.string());
    out << serialize_state(state);
    if (!out) fail(ErrorCode::io, "failed writing snapshot " + path.string());
}

QueryState load_state(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open snapshot " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_state(ss.str());
}

}  // namespace funflow
