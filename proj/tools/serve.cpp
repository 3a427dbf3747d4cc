#include "serve.hpp"

#include <cstdio>

#include <httplib.h>

#include "seal/api.hpp"
#include "seal/error.hpp"

using namespace seal;

int serve_http(const ModelBundle& bundle, const std::optional<IntensityTable>& intensities,
               const std::string& host, int port) {
    httplib::Server server;

    // httplib's defaults include SO_REUSEPORT, which would let a second
    // instance silently share a busy port instead of failing with exit 3.
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes),
                   sizeof(yes));
    });

    server.Post("/v1/estimate", [&](const httplib::Request& req, httplib::Response& res) {
        ParsedEstimateRequest parsed = parse_estimate_request(req.body);
        if (parsed.query.region.has_value() && !intensities.has_value()) {
            parsed.errors.push_back({"region", "server has no intensity table loaded"});
        }
        if (!parsed.ok()) {
            res.status = 400;
            res.set_content(field_errors_text(parsed.errors), "application/json");
            return;
        }
        try {
            const IntensityTable* table = intensities.has_value() ? &*intensities : nullptr;
            res.set_content(estimate_response_text(bundle, parsed.query, table),
                            "application/json");
        } catch (const DataError& e) {
            res.status = 400;
            res.set_content(field_errors_text({{"", e.what()}}), "application/json");
        }
    });

    server.Get("/v1/models", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(bundle_info_text(bundle), "application/json");
    });

    server.Get("/v1/health", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(health_text(bundle), "application/json");
    });

    std::fprintf(stderr, "seal: serving on http://%s:%d\n", host.c_str(), port);
    if (!server.listen(host, port)) {
        std::fprintf(stderr, "seal: cannot bind %s:%d\n", host.c_str(), port);
        return 3;
    }
    return 0;
}
