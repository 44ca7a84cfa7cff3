#pragma once

#include <string>

namespace httplib {
class Server;
}

namespace slw {

class Session;

/// Routes every workbench endpoint on the server. Bodies are canonical JSON;
/// errors are {"error": message} with status 400, 404 or 409.
void register_routes(httplib::Server& server, Session& session);

/// Blocks serving on host:port until the server stops.
bool serve(Session& session, const std::string& host, int port);

}  // namespace slw
