#include "qcdkit/stream.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "qcdkit/errors.hpp"

namespace qcd {

ChangeScenario::ChangeScenario(GaussianMixture pre_, GaussianMixture post_,
                               std::uint64_t change_point_, std::uint64_t length_)
    : pre(std::move(pre_)), post(std::move(post_)), change_point(change_point_), length(length_) {
    if (change_point == 0) {
        throw ConfigError("change point must be >= 1 (or the no-change sentinel)");
    }
    if (length == 0) {
        throw ConfigError("scenario length must be >= 1");
    }
}

ChangeScenario ChangeScenario::immediate_change(std::uint64_t new_length) const {
    return ChangeScenario(pre, post, 1, new_length);
}

ChangeScenario ChangeScenario::pre_only(std::uint64_t new_length) const {
    return ChangeScenario(pre, post, kNoChange, new_length);
}

nlohmann::json ChangeScenario::to_json() const {
    nlohmann::json j{{"pre", pre.to_json()}, {"post", post.to_json()}, {"length", length}};
    if (change_point == kNoChange) {
        j["gamma"] = "inf";
    } else {
        j["gamma"] = change_point;
    }
    return j;
}

ChangeScenario ChangeScenario::from_json(const nlohmann::json& j) {
    for (const char* key : {"pre", "post", "gamma", "length"}) {
        if (!j.contains(key)) {
            throw SchemaError(std::string("scenario needs '") + key + "'");
        }
    }
    std::uint64_t gamma = kNoChange;
    const auto& g = j.at("gamma");
    if (g.is_string()) {
        const auto s = g.get<std::string>();
        if (s != "inf" && s != "infinity") {
            throw SchemaError("scenario 'gamma' must be an integer or \"inf\"");
        }
    } else if (g.is_number_unsigned() || g.is_number_integer()) {
        gamma = g.get<std::uint64_t>();
    } else {
        throw SchemaError("scenario 'gamma' must be an integer or \"inf\"");
    }
    return ChangeScenario(GaussianMixture::from_json(j.at("pre")),
                          GaussianMixture::from_json(j.at("post")), gamma,
                          j.at("length").get<std::uint64_t>());
}

std::vector<double> generate(const ChangeScenario& scenario, Rng& rng) {
    std::vector<double> stream;
    stream.reserve(scenario.length);
    for (std::uint64_t t = 1; t <= scenario.length; ++t) {
        const bool post = scenario.change_point != kNoChange && t >= scenario.change_point;
        stream.push_back(sample(post ? scenario.post : scenario.pre, rng));
    }
    return stream;
}

std::vector<double> generate(const ChangeScenario& scenario, std::uint64_t seed) {
    Rng rng(seed);
    return generate(scenario, rng);
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) {
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        cells.emplace_back();
    }
    return cells;
}

std::string strip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
        s.pop_back();
    }
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) {
        ++start;
    }
    return s.substr(start);
}

double parse_double(const std::string& cell, std::size_t row) {
    const std::string text = strip(cell);
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse number '" + cell + "'");
    }
    if (!std::isfinite(value)) {
        throw NonFiniteValue("row " + std::to_string(row) + ": non-finite value '" + cell + "'");
    }
    return value;
}

std::uint64_t parse_index(const std::string& cell, std::size_t row) {
    const std::string text = strip(cell);
    std::uint64_t value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw ParseError("row " + std::to_string(row) + ": cannot parse integer '" + cell + "'");
    }
    return value;
}

std::vector<std::string> read_header(std::ifstream& file, const std::filesystem::path& path) {
    if (!file) {
        throw ParseError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(file, line)) {
        throw SchemaError("'" + path.string() + "' is empty; expected a header row");
    }
    auto cells = split_row(strip(line));
    for (auto& c : cells) {
        c = strip(c);
    }
    return cells;
}

void check_header(const std::vector<std::string>& header,
                  const std::vector<std::string>& expected) {
    for (const auto& column : expected) {
        if (std::find(header.begin(), header.end(), column) == header.end()) {
            throw SchemaError("missing column '" + column + "'");
        }
    }
    if (header.size() != expected.size()) {
        throw SchemaError("unexpected extra columns in header");
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (header[i] != expected[i]) {
            throw SchemaError("columns must appear in the order " +
                              [&] {
                                  std::string joined;
                                  for (const auto& c : expected) {
                                      joined += joined.empty() ? c : "," + c;
                                  }
                                  return joined;
                              }());
        }
    }
}

std::vector<double> read_error_rows(std::ifstream& file) {
    std::vector<double> values;
    std::string line;
    std::size_t row = 1;  // header was row 1
    std::uint64_t previous_time = 0;
    while (std::getline(file, line)) {
        ++row;
        const std::string stripped = strip(line);
        if (stripped.empty()) {
            continue;
        }
        const auto cells = split_row(stripped);
        if (cells.size() != 2) {
            throw ParseError("row " + std::to_string(row) + ": expected 2 cells, got " +
                             std::to_string(cells.size()));
        }
        const std::uint64_t time = parse_index(cells[0], row);
        if (values.empty() && time != 1) {
            throw ParseError("row " + std::to_string(row) + ": time must start at 1");
        }
        if (!values.empty() && time <= previous_time) {
            throw ParseError("row " + std::to_string(row) + ": time must be strictly increasing");
        }
        previous_time = time;
        values.push_back(parse_double(cells[1], row));
    }
    return values;
}

std::vector<TrajectoryPair> read_trajectory_rows(std::ifstream& file) {
    std::vector<TrajectoryPair> pairs;
    std::string line;
    std::size_t row = 1;
    std::string scene;
    bool have_scene = false;
    std::vector<Point2> predicted;
    std::vector<Point2> truth;
    std::vector<std::string> finished_scenes;

    auto flush_scene = [&](std::size_t at_row) {
        if (!have_scene) {
            return;
        }
        if (predicted.empty()) {
            throw ParseError("row " + std::to_string(at_row) + ": scene '" + scene +
                             "' has no frames");
        }
        pairs.emplace_back(std::move(predicted), std::move(truth));
        finished_scenes.push_back(scene);
        predicted.clear();
        truth.clear();
    };

    while (std::getline(file, line)) {
        ++row;
        const std::string stripped = strip(line);
        if (stripped.empty()) {
            continue;
        }
        const auto cells = split_row(stripped);
        if (cells.size() != 6) {
            throw ParseError("row " + std::to_string(row) + ": expected 6 cells, got " +
                             std::to_string(cells.size()));
        }
        const std::string scene_id = strip(cells[0]);
        const std::uint64_t frame = parse_index(cells[1], row);
        if (!have_scene || scene_id != scene) {
            flush_scene(row);
            if (std::find(finished_scenes.begin(), finished_scenes.end(), scene_id) !=
                finished_scenes.end()) {
                throw ParseError("row " + std::to_string(row) + ": scene '" + scene_id +
                                 "' rows must be contiguous");
            }
            scene = scene_id;
            have_scene = true;
        }
        if (frame != predicted.size() + 1) {
            throw ParseError("row " + std::to_string(row) + ": frames must run 1..L in order");
        }
        predicted.push_back({parse_double(cells[2], row), parse_double(cells[3], row)});
        truth.push_back({parse_double(cells[4], row), parse_double(cells[5], row)});
    }
    flush_scene(row + 1);
    return pairs;
}

const std::vector<std::string> kErrorHeader = {"time", "error"};
const std::vector<std::string> kTrajectoryHeader = {"scene_id", "frame",  "pred_x",
                                                    "pred_y",   "true_x", "true_y"};

}  // namespace

std::vector<double> read_error_stream_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    check_header(read_header(file, path), kErrorHeader);
    return read_error_rows(file);
}

void write_error_stream_csv(const std::filesystem::path& path, std::span<const double> values) {
    std::ofstream file(path);
    if (!file) {
        throw ParseError("cannot open '" + path.string() + "' for writing");
    }
    file << "time,error\n";
    char buffer[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), values[i]);
        file << (i + 1) << ',' << std::string_view(buffer, ptr - buffer) << '\n';
    }
}

std::vector<TrajectoryPair> read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    check_header(read_header(file, path), kTrajectoryHeader);
    return read_trajectory_rows(file);
}

CsvContent ingest_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    const auto header = read_header(file, path);
    if (header == kErrorHeader) {
        return read_error_rows(file);
    }
    if (header == kTrajectoryHeader) {
        return read_trajectory_rows(file);
    }
    throw SchemaError("'" + path.string() + "': header matches neither the error-stream nor the trajectory schema");
}

}  // namespace qcd
