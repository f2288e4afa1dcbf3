#include "nucleo/model.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

#include "nucleo/errors.hpp"
#include "nucleo/util.hpp"

namespace nucleo {

using nlohmann::json;

namespace {

json encode_f64(const std::vector<double>& data, std::vector<std::size_t> shape) {
    std::vector<std::uint8_t> bytes(data.size() * 8);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint64_t u;
        std::memcpy(&u, &data[i], 8);
        for (int b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<std::uint8_t>(u >> (8 * b));
    }
    json j;
    j["dtype"] = "f64le";
    j["shape"] = shape;
    j["data"] = base64_encode(bytes.data(), bytes.size());
    return j;
}

std::vector<double> decode_f64(const json& j, std::size_t expected) {
    if (!j.is_object() || j.value("dtype", "") != "f64le")
        throw ValidationError("model file: expected f64le array payload");
    std::vector<std::uint8_t> bytes = base64_decode(j.at("data").get<std::string>());
    if (bytes.size() != expected * 8)
        throw ValidationError("model file: array payload size mismatch");
    std::vector<double> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        std::uint64_t u = 0;
        for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[i * 8 + b]) << (8 * b);
        std::memcpy(&out[i], &u, 8);
    }
    return out;
}

} // namespace

long NucleoModel::parameter_count() const {
    long count = 0;
    count += static_cast<long>(filter_bank.weights.size()) + static_cast<long>(filter_bank.bias.size());
    count += static_cast<long>(kernel_bank.kernels.size());
    for (const auto& a : mixture.alphas) count += static_cast<long>(a.size());
    count += static_cast<long>(mixture.nu.size());
    return count;
}

void NucleoModel::validate() const {
    filter_bank.validate();
    kernel_bank.validate();
    mixture.validate();
    if (filter_bank.num_filters != kernel_bank.dim)
        throw ValidationError("model: filter count does not match kernel dimension");
    if (mixture.K != kernel_bank.K)
        throw ValidationError("model: mixture kernel count does not match bank");
    if (kernel_bank.background_index < 0)
        throw ValidationError("model: background kernel not selected");
    if (decomposition.psi <= 0 || decomposition.prior_variance <= 0)
        throw ValidationError("model: decomposition defaults out of range");
}

std::string model_to_string(const NucleoModel& model) {
    model.validate();
    json j;
    j["magic"] = kModelMagic;
    j["version"] = kModelVersion;
    j["parameter_count"] = model.parameter_count();

    json fb;
    fb["num_filters"] = model.filter_bank.num_filters;
    fb["kernel_size"] = model.filter_bank.kernel_size;
    fb["weights"] = encode_f64(model.filter_bank.weights,
                               {static_cast<std::size_t>(model.filter_bank.num_filters),
                                static_cast<std::size_t>(model.filter_bank.kernel_size),
                                static_cast<std::size_t>(model.filter_bank.kernel_size)});
    fb["bias"] = encode_f64(model.filter_bank.bias,
                            {static_cast<std::size_t>(model.filter_bank.num_filters)});
    j["filter_bank"] = fb;

    json vb;
    vb["K"] = model.kernel_bank.K;
    vb["dim"] = model.kernel_bank.dim;
    vb["sigma"] = model.kernel_bank.sigma;
    vb["background_index"] = model.kernel_bank.background_index;
    vb["foreground_indices"] = model.kernel_bank.foreground_indices;
    vb["kernels"] = encode_f64(model.kernel_bank.kernels,
                               {static_cast<std::size_t>(model.kernel_bank.K),
                                static_cast<std::size_t>(model.kernel_bank.dim)});
    j["vmf"] = vb;

    json mx;
    mx["M"] = model.mixture.M;
    mx["patch_size"] = model.mixture.patch_size;
    mx["K"] = model.mixture.K;
    std::size_t npos = static_cast<std::size_t>(model.mixture.patch_size) * model.mixture.patch_size;
    json alphas = json::array();
    for (const auto& a : model.mixture.alphas)
        alphas.push_back(encode_f64(a, {npos, static_cast<std::size_t>(model.mixture.K)}));
    mx["alphas"] = alphas;
    mx["nu"] = encode_f64(model.mixture.nu, {model.mixture.nu.size()});
    json masks = json::array();
    for (const auto& m : model.mixture.fg_masks) masks.push_back(encode_f64(m, {npos}));
    mx["fg_masks"] = masks;
    j["mixture"] = mx;

    json det;
    det["rotations"] = model.detection.rotations;
    det["nms_radius"] = model.detection.nms_radius;
    j["detection"] = det;

    json dec;
    dec["psi"] = model.decomposition.psi;
    dec["lambda"] = model.decomposition.lambda;
    dec["prior_variance"] = model.decomposition.prior_variance;
    dec["prior_floor"] = model.decomposition.prior_floor;
    j["decomposition"] = dec;

    return j.dump(2) + "\n";
}

NucleoModel model_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception&) {
        throw ValidationError("unrecognized model format (not a model file)");
    }
    if (!j.is_object() || j.value("magic", "") != kModelMagic)
        throw ValidationError("unrecognized model format (bad magic)");
    int version = j.value("version", -1);
    if (version != kModelVersion)
        throw ValidationError("unsupported model version " + std::to_string(version) +
                              " (this build reads version 1)");

    NucleoModel model;
    try {
        const json& fb = j.at("filter_bank");
        model.filter_bank.num_filters = fb.at("num_filters").get<int>();
        model.filter_bank.kernel_size = fb.at("kernel_size").get<int>();
        std::size_t wsz = static_cast<std::size_t>(model.filter_bank.num_filters) *
                          model.filter_bank.kernel_size * model.filter_bank.kernel_size;
        model.filter_bank.weights = decode_f64(fb.at("weights"), wsz);
        model.filter_bank.bias =
            decode_f64(fb.at("bias"), static_cast<std::size_t>(model.filter_bank.num_filters));

        const json& vb = j.at("vmf");
        model.kernel_bank.K = vb.at("K").get<int>();
        model.kernel_bank.dim = vb.at("dim").get<int>();
        model.kernel_bank.sigma = vb.at("sigma").get<double>();
        model.kernel_bank.background_index = vb.at("background_index").get<int>();
        model.kernel_bank.foreground_indices =
            vb.at("foreground_indices").get<std::vector<int>>();
        model.kernel_bank.kernels =
            decode_f64(vb.at("kernels"),
                       static_cast<std::size_t>(model.kernel_bank.K) * model.kernel_bank.dim);

        const json& mx = j.at("mixture");
        model.mixture.M = mx.at("M").get<int>();
        model.mixture.patch_size = mx.at("patch_size").get<int>();
        model.mixture.K = mx.at("K").get<int>();
        std::size_t npos =
            static_cast<std::size_t>(model.mixture.patch_size) * model.mixture.patch_size;
        const json& alphas = mx.at("alphas");
        if (static_cast<int>(alphas.size()) != model.mixture.M)
            throw ValidationError("model file: alpha component count mismatch");
        for (const auto& a : alphas)
            model.mixture.alphas.push_back(
                decode_f64(a, npos * static_cast<std::size_t>(model.mixture.K)));
        model.mixture.nu = decode_f64(mx.at("nu"), static_cast<std::size_t>(model.mixture.M));
        const json& masks = mx.at("fg_masks");
        if (static_cast<int>(masks.size()) != model.mixture.M)
            throw ValidationError("model file: mask component count mismatch");
        for (const auto& m : masks) model.mixture.fg_masks.push_back(decode_f64(m, npos));

        const json& det = j.at("detection");
        model.detection.rotations = det.at("rotations").get<std::vector<double>>();
        model.detection.nms_radius = det.at("nms_radius").get<double>();

        const json& dec = j.at("decomposition");
        model.decomposition.psi = dec.at("psi").get<double>();
        model.decomposition.lambda = dec.at("lambda").get<double>();
        model.decomposition.prior_variance = dec.at("prior_variance").get<double>();
        model.decomposition.prior_floor = dec.at("prior_floor").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model file: missing or malformed field: ") + e.what());
    }

    model.validate();
    return model;
}

void save_model(const std::string& path, const NucleoModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PipelineError("cannot write model file: " + path);
    out << model_to_string(model);
}

NucleoModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open model file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_string(text);
}

void save_filter_bank(const std::string& path, const FilterBank& bank) {
    bank.validate();
    json j;
    j["magic"] = "NUCLEO-FILTERS";
    j["num_filters"] = bank.num_filters;
    j["kernel_size"] = bank.kernel_size;
    j["weights"] = encode_f64(bank.weights, {static_cast<std::size_t>(bank.num_filters),
                                             static_cast<std::size_t>(bank.kernel_size),
                                             static_cast<std::size_t>(bank.kernel_size)});
    j["bias"] = encode_f64(bank.bias, {static_cast<std::size_t>(bank.num_filters)});
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PipelineError("cannot write filter bank: " + path);
    out << j.dump(2) << "\n";
}

FilterBank load_filter_bank(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open filter bank: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        throw ValidationError("unrecognized filter bank format: " + path);
    }
    if (j.value("magic", "") != "NUCLEO-FILTERS")
        throw ValidationError("unrecognized filter bank format: " + path);
    FilterBank bank;
    bank.num_filters = j.at("num_filters").get<int>();
    bank.kernel_size = j.at("kernel_size").get<int>();
    std::size_t wsz = static_cast<std::size_t>(bank.num_filters) * bank.kernel_size *
                      bank.kernel_size;
    bank.weights = decode_f64(j.at("weights"), wsz);
    bank.bias = decode_f64(j.at("bias"), static_cast<std::size_t>(bank.num_filters));
    bank.validate();
    return bank;
}

} // namespace nucleo
