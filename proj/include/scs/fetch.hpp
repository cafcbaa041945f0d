#pragma once

#include <optional>
#include <string>

namespace scs {

// Two endpoint styles behind one call: a node speaking JSON-RPC eth_getCode,
// or an etherscan-style explorer proxy API (same call shape, GET + api key).
enum class EndpointKind { rpc, explorer };

EndpointKind endpoint_kind_from_string(const std::string& name);

struct FetchOptions {
    std::string endpoint;  // e.g. "http://127.0.0.1:8545"
    EndpointKind kind = EndpointKind::rpc;
    std::string api_key;   // explorer style; usually from SCS_API_KEY
    std::string cache_dir = ".scs-cache";
    int timeout_seconds = 30;
};

// Deployed code for `address` as canonical hex. The cache directory is
// consulted first; on a network fetch the result is written through, so for a
// fixed cache state the call is a pure function of the address. Throws
// NetworkError, NotAContract (empty code) or MalformedResponse.
std::string fetch_bytecode(const std::string& address, const FetchOptions& opts);

// Cache primitives (one file per address, content immutable per key).
std::optional<std::string> cache_lookup(const std::string& cache_dir,
                                        const std::string& address);
void cache_store(const std::string& cache_dir, const std::string& address,
                 const std::string& bytecode_hex);

}  // namespace scs
