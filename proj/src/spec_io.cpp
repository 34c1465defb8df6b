#include "ergo/spec_io.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "ergo/errors.hpp"
#include "ergo/expr.hpp"

namespace ergo {

namespace {

using nlohmann::json;

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("spec JSON: ") + e.what(),
                          e.byte > 0 ? e.byte - 1 : 0);
    }
}

void require_object(const json& j) {
    if (!j.is_object())
        throw validation_error("spec must be a JSON object");
}

void reject_unknown_keys(const json& j,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) known = true;
        if (!known)
            throw validation_error("unknown spec field '" + item.key() + "'");
    }
}

std::string get_string(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string())
        throw validation_error(std::string("spec needs a string field '") +
                               key + "'");
    return j[key].get<std::string>();
}

std::map<std::string, double> get_params(const json& j) {
    std::map<std::string, double> params;
    if (!j.contains("params")) return params;
    const json& p = j["params"];
    if (!p.is_object())
        throw validation_error("spec field 'params' must be an object");
    for (const auto& item : p.items()) {
        if (!item.value().is_number())
            throw validation_error("spec parameter '" + item.key() +
                                   "' must be a number");
        params[item.key()] = item.value().get<double>();
    }
    return params;
}

double endpoint(const json& v, const char* side) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf") return INFINITY;
        if (s == "-inf") return -INFINITY;
    }
    throw validation_error(std::string("spec domain ") + side +
                           " endpoint must be a number, \"-inf\", or \"inf\"");
}

Interval get_domain(const json& j, Interval fallback) {
    if (!j.contains("domain")) return fallback;
    const json& d = j["domain"];
    if (!d.is_array() || d.size() != 2)
        throw validation_error("spec field 'domain' must be a [lo, hi] pair");
    Interval dom{endpoint(d[0], "lower"), endpoint(d[1], "upper")};
    if (!(dom.lo < dom.hi))
        throw validation_error("spec domain is empty");
    return dom;
}

double get_x0(const json& j, double fallback) {
    if (!j.contains("x0")) return fallback;
    if (!j["x0"].is_number())
        throw validation_error("spec field 'x0' must be a number");
    return j["x0"].get<double>();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("spec file not found: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void fill_rates(const std::string& name, const SpecHints& hints,
                std::map<std::string, double>& params) {
    if (!hints.rates) return;
    const auto fill = [&params](const char* key, double v) {
        if (!params.count(key)) params[key] = v;
    };
    if (name == "additive" || name == "additive_dynamic") {
        fill("a", hints.rates->drift);
        fill("b", hints.rates->volatility);
    } else if (name == "cramer" || name == "cramer_dynamic" ||
               name == "exp_test" || name == "exp_test_dynamic") {
        fill("a_u", hints.rates->drift);
        fill("b_u", hints.rates->volatility);
    }
}

ItoProcess make_catalog_dynamic(const std::string& name,
                                std::map<std::string, double> params,
                                const SpecHints& hints) {
    if (!params.count("x0")) params["x0"] = hints.x0;
    fill_rates(name, hints, params);
    return catalog_dynamic(name, params);
}

}  // namespace

UtilityFunction parse_utility_spec(const std::string& text,
                                   const SpecHints& hints) {
    const json j = parse_json(text);
    require_object(j);
    const std::string kind = get_string(j, "kind");
    if (kind == "catalog") {
        reject_unknown_keys(j, {"kind", "name", "params"});
        return catalog_utility(get_string(j, "name"), get_params(j));
    }
    if (kind == "expr") {
        reject_unknown_keys(j, {"kind", "source", "domain"});
        return utility_from_expression(Expr::parse(get_string(j, "source")),
                                       get_domain(j, hints.domain));
    }
    throw validation_error("spec kind must be \"catalog\" or \"expr\", got \"" +
                           kind + "\"");
}

ItoProcess parse_dynamic_spec(const std::string& text, const SpecHints& hints) {
    const json j = parse_json(text);
    require_object(j);
    const std::string kind = get_string(j, "kind");
    if (kind == "catalog") {
        reject_unknown_keys(j, {"kind", "name", "params", "x0"});
        auto params = get_params(j);
        if (j.contains("x0")) {
            if (params.count("x0"))
                throw validation_error(
                    "spec gives x0 both at top level and in params");
            params["x0"] = get_x0(j, hints.x0);
        }
        return make_catalog_dynamic(get_string(j, "name"), std::move(params),
                                    hints);
    }
    if (kind == "expr") {
        reject_unknown_keys(j, {"kind", "drift", "diffusion", "domain", "x0"});
        return dynamic_from_expressions(Expr::parse(get_string(j, "drift")),
                                        Expr::parse(get_string(j, "diffusion")),
                                        get_domain(j, hints.domain),
                                        get_x0(j, hints.x0));
    }
    throw validation_error("spec kind must be \"catalog\" or \"expr\", got \"" +
                           kind + "\"");
}

UtilityFunction resolve_utility(const std::string& arg, const SpecHints& hints) {
    if (arg.empty()) throw validation_error("empty utility spec");
    if (arg.front() == '@')
        return parse_utility_spec(read_file(arg.substr(1)), hints);
    if (arg.rfind("expr:", 0) == 0)
        return utility_from_expression(Expr::parse(arg.substr(5)), hints.domain);
    return catalog_utility(arg, {});
}

ItoProcess resolve_dynamic(const std::string& arg, const SpecHints& hints) {
    if (arg.empty()) throw validation_error("empty dynamic spec");
    if (arg.front() == '@')
        return parse_dynamic_spec(read_file(arg.substr(1)), hints);
    if (arg.rfind("expr:", 0) == 0) {
        const std::string body = arg.substr(5);
        const auto split = body.find(';');
        if (split == std::string::npos)
            throw validation_error(
                "expression dynamic needs \"expr:DRIFT;DIFFUSION\"");
        return dynamic_from_expressions(Expr::parse(body.substr(0, split)),
                                        Expr::parse(body.substr(split + 1)),
                                        hints.domain, hints.x0);
    }
    return make_catalog_dynamic(arg, {}, hints);
}

}  // namespace ergo
