#include "scs/fetch.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "scs/errors.hpp"
#include "scs/hex.hpp"

namespace scs {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// "http://host:port/some/path" -> {"http://host:port", "/some/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = endpoint.find('/', host_start);
    if (path_start == std::string::npos) return {endpoint, ""};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

fs::path cache_path(const std::string& cache_dir, const std::string& address) {
    return fs::path(cache_dir) / (address + ".hex");
}

// Handles both endpoint styles: each answers with a JSON object whose
// "result" member is the 0x-prefixed code.
std::string parse_code_response(const std::string& body, const std::string& address) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponse(std::string("not JSON: ") + e.what());
    }
    if (doc.contains("error")) {
        std::string msg = doc["error"].is_object() && doc["error"].contains("message")
                              ? doc["error"]["message"].get<std::string>()
                              : doc["error"].dump();
        throw MalformedResponse("endpoint error: " + msg);
    }
    if (!doc.contains("result") || !doc["result"].is_string()) {
        throw MalformedResponse("missing string 'result' member");
    }
    std::string code;
    try {
        code = normalize_hex(doc["result"].get<std::string>());
    } catch (const Error& e) {
        throw MalformedResponse(std::string("result is not hex: ") + e.what());
    }
    if (code.empty()) throw NotAContract(address);
    return code;
}

}  // namespace

EndpointKind endpoint_kind_from_string(const std::string& name) {
    if (name == "rpc") return EndpointKind::rpc;
    if (name == "explorer") return EndpointKind::explorer;
    throw Error(ErrorKind::usage, "unknown endpoint kind '" + name + "' (rpc|explorer)");
}

std::optional<std::string> cache_lookup(const std::string& cache_dir,
                                        const std::string& address) {
    std::ifstream in(cache_path(cache_dir, address), std::ios::binary);
    if (!in) return std::nullopt;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

void cache_store(const std::string& cache_dir, const std::string& address,
                 const std::string& bytecode_hex) {
    fs::create_directories(cache_dir);
    fs::path final_path = cache_path(cache_dir, address);
    // Write-then-rename so concurrent writers for the same key stay safe
    // (content is immutable per address, last writer wins).
    static std::atomic<unsigned> counter{0};
    fs::path tmp = final_path;
    tmp += ".tmp" + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::runtime, "cannot write cache file " + tmp.string());
        out << bytecode_hex;
    }
    fs::rename(tmp, final_path);
}

std::string fetch_bytecode(const std::string& address, const FetchOptions& opts) {
    const std::string addr = normalize_address(address);

    if (auto cached = cache_lookup(opts.cache_dir, addr)) {
        if (cached->empty()) throw NotAContract(addr);
        return *cached;
    }

    auto [base, path_prefix] = split_endpoint(opts.endpoint);
    httplib::Client cli(base);
    cli.set_connection_timeout(opts.timeout_seconds);
    cli.set_read_timeout(opts.timeout_seconds);

    httplib::Result res;
    if (opts.kind == EndpointKind::rpc) {
        json req = {{"jsonrpc", "2.0"},
                    {"id", 1},
                    {"method", "eth_getCode"},
                    {"params", {"0x" + addr, "latest"}}};
        res = cli.Post(path_prefix.empty() ? "/" : path_prefix, req.dump(), "application/json");
    } else {
        std::string target = (path_prefix.empty() ? "/api" : path_prefix) +
                             "?module=proxy&action=eth_getCode&address=0x" + addr +
                             "&tag=latest";
        if (!opts.api_key.empty()) target += "&apikey=" + opts.api_key;
        res = cli.Get(target);
    }

    if (!res) throw NetworkError(httplib::to_string(res.error()) + " for " + opts.endpoint);
    if (res->status != 200) {
        throw NetworkError("HTTP " + std::to_string(res->status) + " from " + opts.endpoint);
    }
    std::string code = parse_code_response(res->body, addr);
    cache_store(opts.cache_dir, addr, code);
    return code;
}

}  // namespace scs
