#include "mofq/bundle.hpp"
#include "mofq/errors.hpp"

#include "json.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mofq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int manifest_version = 1;

std::string le_bytes_f32(const std::vector<float>& vals) {
    std::string out(vals.size() * 4, '\0');
    for (size_t i = 0; i < vals.size(); ++i) {
        auto u = std::bit_cast<uint32_t>(vals[i]);
        out[4 * i + 0] = static_cast<char>(u & 0xff);
        out[4 * i + 1] = static_cast<char>((u >> 8) & 0xff);
        out[4 * i + 2] = static_cast<char>((u >> 16) & 0xff);
        out[4 * i + 3] = static_cast<char>((u >> 24) & 0xff);
    }
    return out;
}

std::vector<float> f32_from_le(const std::string& bytes) {
    std::vector<float> out(bytes.size() / 4);
    for (size_t i = 0; i < out.size(); ++i) {
        uint32_t u = static_cast<uint8_t>(bytes[4 * i + 0]) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes[4 * i + 1])) << 8) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes[4 * i + 2])) << 16) |
                     (static_cast<uint32_t>(static_cast<uint8_t>(bytes[4 * i + 3])) << 24);
        out[i] = std::bit_cast<float>(u);
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw bundle_error(bundle_error::kind::missing_blob, "cannot open " + p.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

int64_t shape_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

// Blob table shared by every bundle kind.
struct blob_writer {
    json tensors = json::object();
    const fs::path& dir;

    explicit blob_writer(const fs::path& d) : dir(d) {}

    void add_f32(const std::string& name, const std::vector<int64_t>& shape,
                 const std::vector<float>& data) {
        std::string file = name + ".bin";
        atomic_write_file(dir / file, le_bytes_f32(data));
        tensors[name] = {{"file", file}, {"shape", shape}, {"dtype", "f32le"}};
    }
    void add_u8(const std::string& name, const std::vector<int64_t>& shape,
                const std::vector<uint8_t>& data) {
        std::string file = name + ".bin";
        atomic_write_file(dir / file, std::string(data.begin(), data.end()));
        tensors[name] = {{"file", file}, {"shape", shape}, {"dtype", "u8"}};
    }
};

struct blob_reader {
    json tensors;
    fs::path dir;

    const json& entry(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) {
            throw bundle_error(bundle_error::kind::missing_blob, "missing blob " + name);
        }
        return *it;
    }

    std::vector<int64_t> shape_of(const std::string& name) const {
        return entry(name)["shape"].get<std::vector<int64_t>>();
    }

    tensor load_f32(const std::string& name) const {
        const json& e = entry(name);
        if (e.value("dtype", "") != "f32le") {
            throw bundle_error(bundle_error::kind::bad_manifest,
                               "blob " + name + " is not f32le");
        }
        auto shape = e["shape"].get<std::vector<int64_t>>();
        fs::path file = dir / e["file"].get<std::string>();
        if (!fs::exists(file)) {
            throw bundle_error(bundle_error::kind::missing_blob, "missing blob " + name);
        }
        std::string bytes = read_file(file);
        if (static_cast<int64_t>(bytes.size()) != shape_numel(shape) * 4) {
            throw bundle_error(bundle_error::kind::shape_mismatch,
                               "blob " + name + ": file holds " + std::to_string(bytes.size() / 4) +
                               " elements but manifest shape is " + shape_str(shape));
        }
        return tensor{shape, f32_from_le(bytes)};
    }

    std::vector<uint8_t> load_u8(const std::string& name, const std::vector<int64_t>& shape) const {
        const json& e = entry(name);
        if (e.value("dtype", "") != "u8") {
            throw bundle_error(bundle_error::kind::bad_manifest, "blob " + name + " is not u8");
        }
        fs::path file = dir / e["file"].get<std::string>();
        if (!fs::exists(file)) {
            throw bundle_error(bundle_error::kind::missing_blob, "missing blob " + name);
        }
        std::string bytes = read_file(file);
        if (static_cast<int64_t>(bytes.size()) != shape_numel(shape)) {
            throw bundle_error(bundle_error::kind::shape_mismatch,
                               "blob " + name + ": file holds " + std::to_string(bytes.size()) +
                               " codes but manifest shape is " + shape_str(shape));
        }
        return {bytes.begin(), bytes.end()};
    }
};

void write_manifest(const fs::path& dir, json manifest) {
    manifest["version"] = manifest_version;
    fs::create_directories(dir);
    atomic_write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

json read_manifest(const fs::path& dir, const char* required_section) {
    fs::path p = dir / "manifest.json";
    if (!fs::exists(p)) {
        throw bundle_error(bundle_error::kind::bad_manifest, "no manifest.json in " + dir.string());
    }
    json m = json::parse(read_file(p), nullptr, false);
    if (m.is_discarded() || !m.is_object() || !m.contains("version")) {
        throw bundle_error(bundle_error::kind::bad_manifest, "malformed manifest in " + dir.string());
    }
    if (m["version"] != manifest_version) {
        throw bundle_error(bundle_error::kind::version_mismatch,
                           "unsupported manifest version " + m["version"].dump());
    }
    if (!m.contains(required_section)) {
        throw bundle_error(bundle_error::kind::bad_manifest,
                           "manifest in " + dir.string() + " has no '" +
                           std::string(required_section) + "' section");
    }
    return m;
}

void check_nonlinearity(const std::string& tag, const std::string& layer) {
    if (tag != "none" && tag != "relu" && tag != "gelu") {
        throw bundle_error(bundle_error::kind::invalid_model,
                           "layer " + layer + ": unknown nonlinearity '" + tag + "'");
    }
}

} // namespace

void atomic_write_file(const fs::path& path, const std::string& bytes) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw value_error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw value_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

void validate_model_bundle(const model_bundle& b) {
    if (b.layers.empty()) {
        throw bundle_error(bundle_error::kind::invalid_model, "model has no layers");
    }
    for (size_t k = 0; k < b.layers.size(); ++k) {
        const auto& l = b.layers[k];
        check_nonlinearity(l.nonlinearity, l.name);
        auto it = b.tensors.find(l.weight);
        if (it == b.tensors.end()) {
            throw bundle_error(bundle_error::kind::missing_blob, "missing blob " + l.weight);
        }
        const tensor& w = it->second;
        try {
            validate_tensor(w, "weight " + l.weight);
        } catch (const value_error& e) {
            throw bundle_error(bundle_error::kind::invalid_model, e.what());
        }
        if (w.rank() != 2) {
            throw bundle_error(bundle_error::kind::invalid_model,
                               "layer " + l.name + ": weight must be rank 2, got " +
                               shape_str(w.shape));
        }
        if (k > 0) {
            const tensor& prev = b.tensors.at(b.layers[k - 1].weight);
            if (w.dim(1) != prev.dim(0)) {
                throw bundle_error(bundle_error::kind::invalid_model,
                                   "layer " + l.name + " input width " + std::to_string(w.dim(1)) +
                                   " does not match layer " + b.layers[k - 1].name +
                                   " output width " + std::to_string(prev.dim(0)));
            }
        }
    }
}

void validate_calib_for_model(const model_bundle& m, const calib_bundle& c) {
    for (const auto& l : m.layers) {
        auto it = c.batches.find(l.name);
        if (it == c.batches.end() || it->second.empty()) {
            throw bundle_error(bundle_error::kind::invalid_model,
                               "no calibration batches for layer " + l.name);
        }
        int64_t in_width = m.tensors.at(l.weight).dim(1);
        for (const tensor& b : it->second) {
            if (b.rank() != 2 || b.dim(1) != in_width) {
                throw bundle_error(bundle_error::kind::invalid_model,
                                   "calibration batch for layer " + l.name + " has shape " +
                                   shape_str(b.shape) + ", expected [*, " +
                                   std::to_string(in_width) + "]");
            }
        }
    }
}

void save_model_bundle(const model_bundle& b, const fs::path& dir) {
    validate_model_bundle(b);
    fs::create_directories(dir);
    blob_writer blobs(dir);
    json layers = json::array();
    for (const auto& l : b.layers) {
        layers.push_back({{"name", l.name}, {"weight", l.weight}, {"nonlinearity", l.nonlinearity}});
    }
    for (const auto& [name, t] : b.tensors) blobs.add_f32(name, t.shape, t.data);
    write_manifest(dir, {{"layers", layers}, {"tensors", blobs.tensors}});
}

model_bundle load_model_bundle(const fs::path& dir) {
    json m = read_manifest(dir, "layers");
    blob_reader blobs{m.value("tensors", json::object()), dir};

    model_bundle b;
    for (const auto& l : m["layers"]) {
        layer_desc d;
        d.name = l.value("name", "");
        d.weight = l.value("weight", "");
        d.nonlinearity = l.value("nonlinearity", "none");
        b.layers.push_back(d);
        b.tensors.emplace(d.weight, blobs.load_f32(d.weight));
    }
    validate_model_bundle(b);
    return b;
}

void save_calib_bundle(const calib_bundle& c, const fs::path& dir) {
    fs::create_directories(dir);
    blob_writer blobs(dir);
    json calib = json::array();
    for (const auto& layer : c.layers) {
        const auto& batches = c.batches.at(layer);
        json names = json::array();
        for (size_t i = 0; i < batches.size(); ++i) {
            std::string name = layer + ".b" + std::to_string(i);
            blobs.add_f32(name, batches[i].shape, batches[i].data);
            names.push_back(name);
        }
        calib.push_back({{"layer", layer}, {"batches", names}});
    }
    write_manifest(dir, {{"calib", calib}, {"tensors", blobs.tensors}});
}

calib_bundle load_calib_bundle(const fs::path& dir) {
    json m = read_manifest(dir, "calib");
    blob_reader blobs{m.value("tensors", json::object()), dir};

    calib_bundle c;
    for (const auto& entry : m["calib"]) {
        std::string layer = entry.value("layer", "");
        c.layers.push_back(layer);
        auto& vec = c.batches[layer];
        for (const auto& bname : entry["batches"]) {
            vec.push_back(blobs.load_f32(bname.get<std::string>()));
        }
    }
    return c;
}

void save_input_bundle(const std::vector<tensor>& batches, const fs::path& dir) {
    fs::create_directories(dir);
    blob_writer blobs(dir);
    json inputs = json::array();
    for (size_t i = 0; i < batches.size(); ++i) {
        std::string name = "x" + std::to_string(i);
        blobs.add_f32(name, batches[i].shape, batches[i].data);
        inputs.push_back(name);
    }
    write_manifest(dir, {{"inputs", inputs}, {"tensors", blobs.tensors}});
}

std::vector<tensor> load_input_bundle(const fs::path& dir) {
    json m = read_manifest(dir, "inputs");
    blob_reader blobs{m.value("tensors", json::object()), dir};

    std::vector<tensor> out;
    for (const auto& name : m["inputs"]) {
        out.push_back(blobs.load_f32(name.get<std::string>()));
    }
    return out;
}

void save_quantized_model(const quantized_model& q, const fs::path& dir) {
    fs::create_directories(dir);
    blob_writer blobs(dir);
    json layers = json::array();
    for (const auto& l : q.layers) {
        json e = {{"name", l.name},
                  {"nonlinearity", l.nonlinearity},
                  {"format", l.weight.scheme.format.name()},
                  {"granularity", l.weight.scheme.gran == granularity::per_channel
                                      ? "per_channel" : "per_tensor"},
                  {"axis", l.weight.scheme.axis},
                  {"codes", l.name + ".codes"},
                  {"scales", l.name + ".scales"}};
        blobs.add_u8(l.name + ".codes", l.weight.shape, l.weight.codes);
        blobs.add_f32(l.name + ".scales",
                      {static_cast<int64_t>(l.weight.scales.scales.size())},
                      l.weight.scales.scales);
        if (l.a_format) e["a_format"] = l.a_format->name();
        if (l.a_scale) e["a_scale"] = *l.a_scale;
        layers.push_back(e);
    }
    write_manifest(dir, {{"quantized_layers", layers}, {"tensors", blobs.tensors}});
}

quantized_model load_quantized_model(const fs::path& dir) {
    json m = read_manifest(dir, "quantized_layers");
    blob_reader blobs{m.value("tensors", json::object()), dir};

    quantized_model q;
    for (const auto& e : m["quantized_layers"]) {
        quantized_layer l;
        l.name = e.value("name", "");
        l.nonlinearity = e.value("nonlinearity", "none");
        check_nonlinearity(l.nonlinearity, l.name);

        l.weight.scheme.format = parse_format(e.value("format", ""));
        std::string gran = e.value("granularity", "");
        if (gran == "per_channel") {
            l.weight.scheme.gran = granularity::per_channel;
        } else if (gran == "per_tensor") {
            l.weight.scheme.gran = granularity::per_tensor;
        } else {
            throw bundle_error(bundle_error::kind::bad_manifest,
                               "layer " + l.name + ": unknown granularity '" + gran + "'");
        }
        l.weight.scheme.axis = e.value("axis", 0);

        std::string codes_name = e.value("codes", "");
        l.weight.shape = blobs.shape_of(codes_name);
        l.weight.codes = blobs.load_u8(codes_name, l.weight.shape);
        l.weight.scales.scales = blobs.load_f32(e.value("scales", "")).data;

        uint32_t ncodes = code_count(l.weight.scheme.format);
        for (uint8_t c : l.weight.codes) {
            if (c >= ncodes || !std::isfinite(decode(c, l.weight.scheme.format))) {
                throw bundle_error(bundle_error::kind::invalid_model,
                                   "layer " + l.name + ": code " + std::to_string(c) +
                                   " is not a finite value of " + l.weight.scheme.format.name());
            }
        }
        for (float s : l.weight.scales.scales) {
            if (!(s > 0.0f) || !std::isfinite(s)) {
                throw bundle_error(bundle_error::kind::invalid_model,
                                   "layer " + l.name + ": non-positive scale");
            }
        }

        if (e.contains("a_format")) l.a_format = parse_format(e["a_format"].get<std::string>());
        if (e.contains("a_scale")) l.a_scale = e["a_scale"].get<float>();
        q.layers.push_back(std::move(l));
    }
    return q;
}

} // namespace mofq
