#include "osc/serialization.hpp"

#include <initializer_list>
#include <string>

namespace osc {

using nlohmann::json;

namespace {

void reject_unknown(const json& doc, std::initializer_list<const char*> allowed, const char* what) {
    if (!doc.is_object()) {
        throw Error(ErrorKind::InvalidArgument, std::string(what) + " must be a JSON object");
    }
    for (const auto& item : doc.items()) {
        bool known = false;
        for (const char* key : allowed) known = known || item.key() == key;
        if (!known) {
            throw Error(ErrorKind::InvalidArgument, std::string(what) + ": unknown key '" + item.key() + "'");
        }
    }
}

template <typename T>
void read(const json& doc, const char* key, T& out) {
    if (!doc.contains(key)) return;
    try {
        out = doc.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "': " + e.what());
    }
}

void read_count(const json& doc, const char* key, std::size_t& out) {
    if (!doc.contains(key)) return;
    const auto& v = doc.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw Error(ErrorKind::InvalidArgument, std::string("field '") + key + "' must be a non-negative integer");
    }
    out = v.get<std::size_t>();
}

std::string read_string(const json& doc, const char* key, std::string fallback) {
    read(doc, key, fallback);
    return fallback;
}

}  // namespace

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("malformed JSON: ") + e.what());
    }
}

json to_json(const LossConfig& cfg) {
    return {{"alpha", cfg.alpha},
            {"beta", cfg.beta},
            {"eta", cfg.eta},
            {"lambda1", cfg.lambda1},
            {"lambda2", cfg.lambda2},
            {"band_half_width", cfg.band_half_width},
            {"eps", cfg.eps},
            {"phi_mode", std::string(to_string(cfg.phi_mode))},
            {"tv_delta", cfg.tv_delta},
            {"focal_gamma", cfg.focal_gamma},
            {"focal_alpha", cfg.focal_alpha},
            {"clamp", cfg.clamp}};
}

LossConfig loss_config_from_json(const json& doc) {
    reject_unknown(doc,
                   {"alpha", "beta", "eta", "lambda1", "lambda2", "band_half_width", "eps", "phi_mode", "tv_delta",
                    "focal_gamma", "focal_alpha", "clamp"},
                   "loss config");
    LossConfig cfg;
    read(doc, "alpha", cfg.alpha);
    read(doc, "beta", cfg.beta);
    read(doc, "eta", cfg.eta);
    read(doc, "lambda1", cfg.lambda1);
    read(doc, "lambda2", cfg.lambda2);
    read(doc, "band_half_width", cfg.band_half_width);
    read(doc, "eps", cfg.eps);
    cfg.phi_mode = phi_mode_from_string(read_string(doc, "phi_mode", std::string(to_string(cfg.phi_mode))));
    read(doc, "tv_delta", cfg.tv_delta);
    read(doc, "focal_gamma", cfg.focal_gamma);
    read(doc, "focal_alpha", cfg.focal_alpha);
    read(doc, "clamp", cfg.clamp);
    cfg.validate();
    return cfg;
}

json to_json(const SynthSpec& spec) {
    return {{"kind", std::string(to_string(spec.kind))},
            {"width", spec.width},
            {"height", spec.height},
            {"fg_fraction", spec.fg_fraction},
            {"noise", spec.noise},
            {"noise_band", spec.noise_band},
            {"seed", spec.seed}};
}

SynthSpec synth_spec_from_json(const json& doc) {
    reject_unknown(doc, {"kind", "width", "height", "fg_fraction", "noise", "noise_band", "seed"}, "synth spec");
    SynthSpec spec;
    spec.kind = shape_kind_from_string(read_string(doc, "kind", std::string(to_string(spec.kind))));
    read_count(doc, "width", spec.width);
    read_count(doc, "height", spec.height);
    read(doc, "fg_fraction", spec.fg_fraction);
    read(doc, "noise", spec.noise);
    read(doc, "noise_band", spec.noise_band);
    read(doc, "seed", spec.seed);
    spec.validate();
    return spec;
}

json to_json(const FitConfig& cfg) {
    return {{"steps", cfg.steps},
            {"learning_rate", cfg.learning_rate},
            {"loss_kind", std::string(to_string(cfg.loss_kind))},
            {"loss_config", to_json(cfg.loss_config)},
            {"seed", cfg.seed},
            {"init", std::string(to_string(cfg.init))},
            {"init_sigma", cfg.init_sigma},
            {"record_every", cfg.record_every},
            {"image_gain", cfg.image_gain}};
}

FitConfig fit_config_from_json(const json& doc) {
    reject_unknown(doc,
                   {"steps", "learning_rate", "loss_kind", "loss_config", "seed", "init", "init_sigma",
                    "record_every", "image_gain"},
                   "fit config");
    FitConfig cfg;
    read_count(doc, "steps", cfg.steps);
    read(doc, "learning_rate", cfg.learning_rate);
    cfg.loss_kind = loss_kind_from_string(read_string(doc, "loss_kind", std::string(to_string(cfg.loss_kind))));
    if (doc.contains("loss_config")) cfg.loss_config = loss_config_from_json(doc.at("loss_config"));
    read(doc, "seed", cfg.seed);
    cfg.init = init_kind_from_string(read_string(doc, "init", std::string(to_string(cfg.init))));
    read(doc, "init_sigma", cfg.init_sigma);
    read_count(doc, "record_every", cfg.record_every);
    read(doc, "image_gain", cfg.image_gain);
    cfg.validate();
    return cfg;
}

json to_json(const ExperimentSpec& spec) {
    json losses = json::array();
    for (auto k : spec.losses) losses.push_back(std::string(to_string(k)));
    return {{"losses", losses},
            {"seeds", spec.seeds},
            {"dataset", to_json(spec.dataset)},
            {"fit", to_json(spec.fit)},
            {"use_image", spec.use_image}};
}

ExperimentSpec experiment_spec_from_json(const json& doc) {
    reject_unknown(doc, {"losses", "seeds", "num_seeds", "first_seed", "dataset", "fit", "use_image"},
                   "experiment spec");
    ExperimentSpec spec;
    if (doc.contains("losses")) {
        std::vector<std::string> names;
        read(doc, "losses", names);
        spec.losses.clear();
        for (const auto& n : names) spec.losses.push_back(loss_kind_from_string(n));
    }
    if (doc.contains("seeds") && doc.contains("num_seeds")) {
        throw Error(ErrorKind::InvalidArgument, "experiment spec: give either 'seeds' or 'num_seeds'");
    }
    read(doc, "seeds", spec.seeds);
    if (doc.contains("num_seeds")) {
        std::size_t count = 0;
        std::uint64_t first = 1;
        read_count(doc, "num_seeds", count);
        read(doc, "first_seed", first);
        for (std::size_t i = 0; i < count; ++i) spec.seeds.push_back(first + i);
    } else if (doc.contains("first_seed")) {
        throw Error(ErrorKind::InvalidArgument, "experiment spec: 'first_seed' needs 'num_seeds'");
    }
    if (doc.contains("dataset")) spec.dataset = synth_spec_from_json(doc.at("dataset"));
    if (doc.contains("fit")) spec.fit = fit_config_from_json(doc.at("fit"));
    read(doc, "use_image", spec.use_image);
    return spec;
}

json to_json(const LossBreakdown& b, const LossConfig& cfg) {
    json classes = json::array();
    for (const auto& c : b.classes) {
        classes.push_back({{"class", c.class_index},
                           {"l2", c.l2},
                           {"l3", c.l3},
                           {"band_pixels", c.band_pixels},
                           {"b_minus", c.descriptors.b_minus},
                           {"b_plus", c.descriptors.b_plus},
                           {"minus_fallback", c.descriptors.minus_fallback},
                           {"plus_fallback", c.descriptors.plus_fallback},
                           {"degenerate", c.degenerate},
                           {"empty_band", c.empty_band}});
    }
    return {{"kind", "osc"},
            {"value", b.total},
            {"total", b.total},
            {"l1", b.l1},
            {"l2", b.l2},
            {"l3", b.l3},
            {"weights", {{"alpha", cfg.alpha}, {"beta", cfg.beta}, {"eta", cfg.eta}}},
            {"phi_mode", std::string(to_string(cfg.phi_mode))},
            {"band_pixels", b.band_pixels},
            {"classes", classes}};
}

LossBreakdown loss_breakdown_from_json(const json& doc) {
    LossBreakdown b;
    try {
        b.total = doc.at("total").get<double>();
        b.l1 = doc.at("l1").get<double>();
        b.l2 = doc.at("l2").get<double>();
        b.l3 = doc.at("l3").get<double>();
        b.band_pixels = doc.at("band_pixels").get<std::size_t>();
        for (const auto& c : doc.at("classes")) {
            ClassTerms t;
            t.class_index = c.at("class").get<std::size_t>();
            t.l2 = c.at("l2").get<double>();
            t.l3 = c.at("l3").get<double>();
            t.band_pixels = c.at("band_pixels").get<std::size_t>();
            t.descriptors.b_minus = c.at("b_minus").get<double>();
            t.descriptors.b_plus = c.at("b_plus").get<double>();
            t.descriptors.minus_fallback = c.at("minus_fallback").get<bool>();
            t.descriptors.plus_fallback = c.at("plus_fallback").get<bool>();
            t.degenerate = c.at("degenerate").get<bool>();
            t.empty_band = c.at("empty_band").get<bool>();
            b.classes.push_back(t);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("loss breakdown: ") + e.what());
    }
    return b;
}

json to_json(const OffsetResult& r) {
    json points = json::array();
    for (const auto& p : r.curve.points) points.push_back({p.x, p.y});
    return {{"translation", r.translation},
            {"direction", r.direction == OffsetDirection::Inward ? "inward" : "outward"},
            {"regular", r.regular},
            {"singular_indices", r.singular_indices},
            {"perimeter", r.curve.perimeter()},
            {"curve", {{"closed", r.curve.closed}, {"points", points}}}};
}

OffsetResult offset_result_from_json(const json& doc) {
    OffsetResult r;
    try {
        r.translation = doc.at("translation").get<double>();
        const auto dir = doc.at("direction").get<std::string>();
        if (dir != "inward" && dir != "outward") throw Error(ErrorKind::InvalidArgument, "bad direction " + dir);
        r.direction = dir == "inward" ? OffsetDirection::Inward : OffsetDirection::Outward;
        r.regular = doc.at("regular").get<bool>();
        r.singular_indices = doc.at("singular_indices").get<std::vector<std::size_t>>();
        r.curve.closed = doc.at("curve").at("closed").get<bool>();
        for (const auto& p : doc.at("curve").at("points")) {
            r.curve.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("offset result: ") + e.what());
    }
    return r;
}

}  // namespace osc
