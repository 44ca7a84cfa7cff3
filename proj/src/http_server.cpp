#include "slw/http_server.hpp"

// Eigen must precede httplib: <resolv.h> defines a _res macro that clashes with Eigen parameter names.
#include "slw/canonical_json.hpp"
#include "slw/session.hpp"

#include <httplib.h>

namespace slw {

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string::npos ? text.size() : comma;
        if (end > start) out.push_back(text.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string param(const httplib::Request& req, const char* name) {
    return req.has_param(name) ? req.get_param_value(name) : std::string();
}

std::uint64_t parse_id(const std::string& text) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + text + "'");
    }
    if (used != text.size()) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

nlohmann::json body_json(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("malformed JSON body: ") + e.what());
    }
}

void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), "application/json");
}

template <typename Fn>
httplib::Server::Handler handle(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, 200, fn(req));
        } catch (const NotFound& e) {
            send(res, 404, {{"error", e.what()}});
        } catch (const Conflict& e) {
            send(res, 409, {{"error", e.what()}});
        } catch (const std::invalid_argument& e) {
            send(res, 400, {{"error", e.what()}});
        } catch (const nlohmann::json::exception& e) {
            send(res, 400, {{"error", e.what()}});
        } catch (const std::exception& e) {
            send(res, 500, {{"error", e.what()}});
        }
    };
}

}  // namespace

void register_routes(httplib::Server& server, Session& s) {
    server.Get("/genes", handle([&s](const httplib::Request& r) { return s.search_genes(param(r, "q")); }));
    server.Get("/diseases", handle([&s](const httplib::Request&) { return s.diseases(); }));
    server.Get(R"(/diseases/([^/]+)/genes)",
               handle([&s](const httplib::Request& r) { return s.disease_genes(r.matches[1]); }));
    server.Get(R"(/genes/([^/]+)/predictions)",
               handle([&s](const httplib::Request& r) { return s.predictions(r.matches[1]); }));
    server.Get(R"(/genes/([^/]+)/paths)", handle([&s](const httplib::Request& r) {
                   auto max = param(r, "max_paths");
                   return s.paths(r.matches[1], split_list(param(r, "partners")),
                                  max.empty() ? kDefaultMaxPaths : parse_id(max));
               }));
    server.Get(R"(/genes/([^/]+)/aggregate)", handle([&s](const httplib::Request& r) {
                   return s.aggregate(r.matches[1], split_list(param(r, "partners")));
               }));
    server.Get("/embedding", handle([&s](const httplib::Request& r) {
                   return s.embedding(param(r, "disease"), param(r, "primary"), split_list(param(r, "partners")),
                                      split_list(param(r, "lasso")));
               }));
    server.Get(R"(/kg/ego/([^/]+))", handle([&s](const httplib::Request& r) {
                   const auto hops = param(r, "hops");
                   return s.ego(r.matches[1], hops.empty() ? 2 : static_cast<int>(parse_id(hops)),
                                param(r, "graph") == "current");
               }));

    server.Post("/strategies", handle([&s](const httplib::Request& r) { return s.formulate(body_json(r)); }));
    server.Get("/strategies", handle([&s](const httplib::Request&) { return s.pending(); }));
    server.Delete(R"(/strategies/(\d+))",
                  handle([&s](const httplib::Request& r) { return s.remove_pending(parse_id(r.matches[1])); }));
    server.Post("/strategies/apply", handle([&s](const httplib::Request& r) {
                    return s.apply(body_json(r).value("note", std::string()));
                }));
    server.Get("/operations", handle([&s](const httplib::Request&) { return s.operations(); }));
    server.Patch(R"(/operations/(\d+))", handle([&s](const httplib::Request& r) {
                     const auto body = body_json(r);
                     if (!body.contains("note") || !body["note"].is_string()) {
                         throw std::invalid_argument("body must carry a string 'note'");
                     }
                     return s.edit_note(parse_id(r.matches[1]), body["note"].get<std::string>());
                 }));

    server.Post("/retrain", handle([&s](const httplib::Request&) { return s.retrain(); }));
    server.Get(R"(/retrain/(\d+))", handle([&s](const httplib::Request& r) { return s.job(parse_id(r.matches[1])); }));
    server.Get("/models", handle([&s](const httplib::Request&) { return s.models(); }));
    server.Post(R"(/models/(\d+)/activate)",
                handle([&s](const httplib::Request& r) { return s.activate(parse_id(r.matches[1])); }));
}

bool serve(Session& session, const std::string& host, int port) {
    httplib::Server server;
    register_routes(server, session);
    return server.listen(host, port);
}

}  // namespace slw
