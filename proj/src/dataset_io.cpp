#include "ikf/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace ikf {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double value) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw IoError("could not format number");
    return std::string(buf, end);
}

namespace {

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw IoError(source + ":" + std::to_string(line) + ": not a number: '" + std::string(text) + "'");
    }
    return value;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

json population_json(const PopulationSpec& spec) {
    return json{{"weights", std::vector<double>(spec.weights.begin(), spec.weights.end())},
                {"feature_mean", spec.feature_mean},
                {"feature_sd", spec.feature_sd},
                {"noise_sd", spec.noise_sd}};
}

Vector to_vector(const std::vector<double>& values) {
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

PopulationSpec population_from_json(const json& j) {
    PopulationSpec spec;
    spec.weights = to_vector(j.at("weights").get<std::vector<double>>());
    spec.feature_mean = j.at("feature_mean").get<double>();
    spec.feature_sd = j.at("feature_sd").get<double>();
    spec.noise_sd = j.at("noise_sd").get<double>();
    return spec;
}

std::string block_file(const std::string& prefix, std::size_t index) {
    return prefix + "_" + std::to_string(index) + ".csv";
}

}  // namespace

void write_block_csv(std::ostream& out, const DataBlock& block) {
    out << "target";
    for (Eigen::Index j = 0; j < block.cols(); ++j) out << ",x" << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
        out << format_double(block.targets(i));
        for (Eigen::Index j = 0; j < block.cols(); ++j) out << ',' << format_double(block.features(i, j));
        out << '\n';
    }
}

DataBlock read_block_csv(std::istream& in, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) throw IoError(source_name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.size() < 2 || header[0] != "target") {
        throw IoError(source_name + ": header must start with 'target' followed by x1..xq");
    }
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j] != "x" + std::to_string(j)) {
            throw IoError(source_name + ": unexpected column '" + std::string(header[j]) + "'");
        }
    }
    const std::size_t q = header.size() - 1;

    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != q + 1) {
            throw IoError(source_name + ":" + std::to_string(line_no) + ": expected " +
                          std::to_string(q + 1) + " fields");
        }
        for (auto f : fields) values.push_back(parse_double(f, source_name, line_no));
        ++rows;
    }
    if (rows == 0) throw IoError(source_name + ": no data rows");

    const auto n = static_cast<Eigen::Index>(rows);
    const auto cols = static_cast<Eigen::Index>(q + 1);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> table(
        values.data(), n, cols);
    return DataBlock{table.col(0), table.rightCols(cols - 1)};
}

void write_block_csv(const fs::path& path, const DataBlock& block) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_block_csv(out, block);
    if (!out) throw IoError("write failed: " + path.string());
}

DataBlock read_block_csv(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return read_block_csv(in, path.string());
}

std::string penguin_mode_name(PenguinMode mode) {
    return mode == PenguinMode::ConvexCombination ? "convex_combination" : "distribution_mixture";
}

PenguinMode parse_penguin_mode(const std::string& name) {
    if (name == "convex_combination") return PenguinMode::ConvexCombination;
    if (name == "distribution_mixture") return PenguinMode::DistributionMixture;
    throw DomainError("unknown penguin mode '" + name + "'");
}

void export_dataset(const fs::path& dir, const Dataset& dataset) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const DatasetManifest& m = dataset.manifest;
    const IterationData& d = dataset.data;
    json files = json::array();
    auto write_all = [&](const std::string& prefix, const std::vector<DataBlock>& blocks) {
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const std::string name = block_file(prefix, i + 1);
            write_block_csv(dir / name, blocks[i]);
            files.push_back(name);
        }
    };
    write_all("bird", d.birds);
    write_all("fish", d.fish);
    write_all("penguin", d.penguin_train);
    write_all("penguin_test", d.penguin_test);

    json manifest{
        {"q", m.q},
        {"n", m.n},
        {"m", m.m},
        {"alpha", m.alpha},
        {"mode", penguin_mode_name(m.mode)},
        {"seeds", {{"master_seed", m.master_seed}, {"iteration", m.iteration}}},
        {"bird", population_json(m.bird)},
        {"fish", population_json(m.fish)},
        {"penguin", {{"weights", std::vector<double>(m.penguin_weights.begin(), m.penguin_weights.end())},
                     {"noise_sd", m.penguin_noise_sd}}},
        {"counts",
         {{"bird", d.birds.size()},
          {"fish", d.fish.size()},
          {"penguin", d.penguin_train.size()},
          {"penguin_test", d.penguin_test.size()}}},
        {"files", files},
    };
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot open " + (dir / "manifest.json").string() + " for writing");
    out << manifest.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "manifest.json").string());
}

Dataset import_dataset(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
    Dataset ds;
    json manifest;
    json counts;
    try {
        manifest = json::parse(in);
        DatasetManifest& m = ds.manifest;
        m.q = manifest.at("q").get<Eigen::Index>();
        m.n = manifest.at("n").get<Eigen::Index>();
        m.m = manifest.at("m").get<std::size_t>();
        m.alpha = manifest.at("alpha").get<double>();
        m.mode = parse_penguin_mode(manifest.at("mode").get<std::string>());
        m.master_seed = manifest.at("seeds").at("master_seed").get<std::uint64_t>();
        m.iteration = manifest.at("seeds").at("iteration").get<std::uint64_t>();
        m.bird = population_from_json(manifest.at("bird"));
        m.fish = population_from_json(manifest.at("fish"));
        m.penguin_weights = to_vector(manifest.at("penguin").at("weights").get<std::vector<double>>());
        m.penguin_noise_sd = manifest.at("penguin").at("noise_sd").get<double>();
        counts = manifest.at("counts");
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw IoError("malformed manifest in " + dir.string() + ": " + e.what());
    }

    auto read_all = [&](const std::string& prefix, std::vector<DataBlock>& out) {
        const auto count = counts.value(prefix, std::size_t{0});
        for (std::size_t i = 1; i <= count; ++i) out.push_back(read_block_csv(dir / block_file(prefix, i)));
    };
    read_all("bird", ds.data.birds);
    read_all("fish", ds.data.fish);
    read_all("penguin", ds.data.penguin_train);
    read_all("penguin_test", ds.data.penguin_test);
    ds.data.penguin_weights = ds.manifest.penguin_weights;
    return ds;
}

}  // namespace ikf
