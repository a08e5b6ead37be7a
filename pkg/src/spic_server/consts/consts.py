LOGGER_NAME = "spic"
SERVER_NAME = "spic-mcp-server"

# engine-wide numeric tolerances (overridable through config)
SYMMETRY_TOL = 1e-9
PSD_TOL = 1e-8
DEGENERACY_TOL = 1e-10
CHECK_TOL = 1e-8

# evidence sessions kept by the MCP server before the least recently used is dropped
MAX_SESSIONS = 32

TREE_MODE_BUSHY = "bushy"
TREE_MODE_CHAIN = "chain"

OUTPUT_HUMAN = "human"
OUTPUT_MACHINE = "machine"

NETWORK_RESOURCE_SCHEME = "network"
