#include "fcprune/model_io.hpp"

#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "fcprune/csv.hpp"
#include "fcprune/errors.hpp"
#include "fcprune/tensor_io.hpp"

namespace fcprune {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string save_model(const DenseNet& net, const std::string& dir, const std::string& name) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    ordered_json manifest;
    manifest["format"] = "fcprune-model-v1";
    manifest["layers"] = ordered_json::array();
    for (std::size_t i = 0; i < net.num_layers(); ++i) {
        const Layer& l = net.layer(i);
        const std::string wfile = name + "_layer" + std::to_string(i) + "_w.fta1";
        write_fta1((fs::path(dir) / wfile).string(), l.weights);
        ordered_json jl;
        jl["activation"] = activation_name(l.activation);
        jl["d_in"] = l.d_in();
        jl["d_out"] = l.d_out();
        jl["weights"] = wfile;
        if (l.bias) {
            const std::string bfile = name + "_layer" + std::to_string(i) + "_b.fta1";
            write_fta1((fs::path(dir) / bfile).string(), Matrix(1, l.bias->size(), *l.bias));
            jl["bias"] = bfile;
        } else {
            jl["bias"] = nullptr;
        }
        manifest["layers"].push_back(std::move(jl));
    }
    const std::string path = (fs::path(dir) / (name + ".json")).string();
    write_text_file(path, manifest.dump(2) + "\n");
    return path;
}

DenseNet load_model(const std::string& manifest_path) {
    ordered_json manifest;
    try {
        manifest = ordered_json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model manifest: parse error in " + manifest_path + ": " + e.what());
    }
    if (manifest.value("format", "") != "fcprune-model-v1")
        throw std::invalid_argument("model manifest: unknown format field in " + manifest_path);
    if (!manifest.contains("layers") || !manifest["layers"].is_array() || manifest["layers"].empty())
        throw std::invalid_argument("model manifest: missing layers array in " + manifest_path);

    const fs::path dir = fs::path(manifest_path).parent_path();
    std::vector<Layer> layers;
    for (const auto& jl : manifest["layers"]) {
        Layer l;
        l.activation = activation_from_name(jl.at("activation").get<std::string>());
        l.weights = read_fta1((dir / jl.at("weights").get<std::string>()).string());
        if (jl.contains("bias") && !jl["bias"].is_null()) {
            const Matrix b = read_fta1((dir / jl["bias"].get<std::string>()).string());
            if (b.rows() != 1 || b.cols() != l.d_out())
                throw std::invalid_argument("model manifest: bias tensor shape mismatch");
            l.bias = b.values();
        }
        const std::size_t d_in = jl.at("d_in").get<std::size_t>();
        const std::size_t d_out = jl.at("d_out").get<std::size_t>();
        if (d_in != l.d_in() || d_out != l.d_out())
            throw std::invalid_argument("model manifest: declared dims disagree with tensor shape");
        layers.push_back(std::move(l));
    }
    return DenseNet(std::move(layers));
}

void save_dataset(const LabeledSet& set, const std::string& x_path, const std::string& y_path) {
    if (set.X.cols() != set.y.size())
        throw std::invalid_argument("save_dataset: label count mismatch");
    write_fta1(x_path, set.X);
    Matrix labels(1, set.y.size());
    for (std::size_t j = 0; j < set.y.size(); ++j) labels(0, j) = static_cast<double>(set.y[j]);
    write_fta1(y_path, labels);
}

LabeledSet load_dataset(const std::string& x_path, const std::string& y_path) {
    LabeledSet set;
    set.X = read_fta1(x_path);
    const Matrix labels = read_fta1(y_path);
    if (labels.rows() != 1)
        throw std::invalid_argument("load_dataset: labels tensor must be 1 x m");
    if (labels.cols() != set.X.cols())
        throw std::invalid_argument("load_dataset: label count " + std::to_string(labels.cols()) +
                                    " does not match sample count " + std::to_string(set.X.cols()));
    set.y.resize(labels.cols());
    for (std::size_t j = 0; j < labels.cols(); ++j)
        set.y[j] = static_cast<int>(std::lround(labels(0, j)));
    return set;
}

LabeledSet load_csv_dataset(const std::string& csv_path) {
    const auto rows = read_numeric_csv(csv_path);
    if (rows.empty()) throw io_error("csv dataset: no rows in " + csv_path);
    const std::size_t width = rows.front().size();
    if (width < 2) throw io_error("csv dataset: rows need a label plus at least one feature");
    for (const auto& r : rows)
        if (r.size() != width) throw io_error("csv dataset: ragged rows in " + csv_path);
    LabeledSet set;
    set.X = Matrix(width - 1, rows.size());
    set.y.resize(rows.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        set.y[j] = static_cast<int>(std::lround(rows[j][0]));
        for (std::size_t i = 0; i + 1 < width; ++i) set.X(i, j) = rows[j][i + 1];
    }
    return set;
}

} // namespace fcprune
