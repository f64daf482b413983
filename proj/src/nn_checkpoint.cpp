#include "mbo/nn/checkpoint.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mbo/errors.hpp"

namespace mbo::nn {

using nlohmann::json;

namespace {

// Tensor blobs are raw IEEE-754 float64, little-endian. All supported
// targets are little-endian; the static_assert below guards the memcpy.
static_assert(sizeof(double) == 8);

void write_blob(const std::string& path, const std::vector<Tensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write tensor blob: " + path);
    for (const Tensor& t : tensors)
        out.write(reinterpret_cast<const char*>(t.ptr()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
}

}  // namespace

void Checkpoint::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    const ModelSpec& spec = params.spec();

    json manifest;
    manifest["schema_version"] = 1;
    manifest["arch"] = arch_name(spec.arch);
    manifest["lookback"] = spec.lookback;
    manifest["feature_width"] = spec.feature_width;
    manifest["layers"] = spec.layers;
    manifest["units"] = spec.units;
    manifest["seed"] = seed;
    manifest["param_count"] = params.total_size();
    manifest["best_epoch"] = best_epoch;

    json tensor_table = json::array();
    std::size_t offset = 0;
    for (const Tensor& t : params.tensors()) {
        tensor_table.push_back({{"name", t.name},
                                {"rows", t.rows},
                                {"cols", t.cols},
                                {"byte_offset", offset}});
        offset += t.size() * sizeof(double);
    }
    manifest["tensors"] = tensor_table;

    json hist = json::array();
    for (const EpochRecord& r : history)
        hist.push_back({{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"val_loss", r.val_loss}});
    manifest["history"] = hist;

    if (!norm_mean.empty()) {
        manifest["norm_mean"] = norm_mean;
        manifest["norm_std"] = norm_std;
    }

    std::ofstream mf(dir + "/manifest.json");
    if (!mf) throw IoError("cannot write checkpoint manifest in " + dir);
    mf << manifest.dump(2) << '\n';

    write_blob(dir + "/tensors.bin", params.tensors());
}

Checkpoint Checkpoint::load(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw IoError("cannot open checkpoint manifest in " + dir);
    json manifest = json::parse(mf);

    ModelSpec spec;
    spec.arch = arch_from_name(manifest.at("arch").get<std::string>());
    spec.lookback = manifest.at("lookback").get<int>();
    spec.feature_width = manifest.at("feature_width").get<int>();
    spec.layers = manifest.at("layers").get<int>();
    spec.units = manifest.at("units").get<int>();

    Checkpoint ckpt;
    ckpt.params = Parameters(spec);
    ckpt.seed = manifest.at("seed").get<std::uint64_t>();
    ckpt.best_epoch = manifest.at("best_epoch").get<int>();
    for (const json& r : manifest.at("history"))
        ckpt.history.push_back(EpochRecord{r.at("epoch").get<int>(),
                                           r.at("train_loss").get<double>(),
                                           r.at("val_loss").get<double>()});
    if (manifest.contains("norm_mean")) {
        ckpt.norm_mean = manifest.at("norm_mean").get<std::vector<double>>();
        ckpt.norm_std = manifest.at("norm_std").get<std::vector<double>>();
    }

    // Validate the recorded shapes against the rebuilt layout before
    // touching the blob.
    const json& table = manifest.at("tensors");
    if (table.size() != ckpt.params.tensors().size())
        throw DataError("checkpoint tensor table does not match architecture");
    for (std::size_t i = 0; i < table.size(); ++i) {
        const Tensor& t = ckpt.params[i];
        if (table[i].at("name") != t.name || table[i].at("rows") != t.rows ||
            table[i].at("cols") != t.cols)
            throw DataError("checkpoint tensor mismatch at slot " + std::to_string(i));
    }

    std::ifstream blob(dir + "/tensors.bin", std::ios::binary);
    if (!blob) throw IoError("cannot open tensor blob in " + dir);
    for (Tensor& t : ckpt.params.tensors()) {
        blob.read(reinterpret_cast<char*>(t.ptr()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!blob) throw DataError("tensor blob truncated in " + dir);
    }
    char extra;
    if (blob.read(&extra, 1)) throw DataError("tensor blob has trailing bytes in " + dir);
    return ckpt;
}

}  // namespace mbo::nn
