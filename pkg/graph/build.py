from langgraph.graph import END, START, StateGraph

from .nodes.check import check_node
from .nodes.compare import compare_node
from .nodes.fit import fit_node
from .nodes.flsim import flsim_node
from .nodes.load_config import load_config_node
from .nodes.report import report_node
from .nodes.solve import solve_node
from .nodes.sweep import sweep_node
from .nodes.verify import verify_node
from .router import COMMANDS, router_node
from .state import RunState

COMMAND_NODES = {
    "solve": solve_node,
    "sweep": sweep_node,
    "compare": compare_node,
    "fit": fit_node,
    "flsim": flsim_node,
    "verify": verify_node,
    "check": check_node,
}


def build_graph():
    g = StateGraph(RunState)
    g.add_node("router", router_node)
    g.add_node("load_config", load_config_node)
    for name, node in COMMAND_NODES.items():
        g.add_node(name, node)
    g.add_node("report", report_node)

    g.add_edge(START, "router")

    def decide(state: RunState) -> str:
        return state.get("next_action", "report")

    g.add_conditional_edges(
        "router",
        decide,
        {"load_config": "load_config", "fit": "fit", "report": "report"},
    )
    # load_config hands over to the subcommand node, or to report on a config error
    g.add_conditional_edges(
        "load_config",
        decide,
        {**{c: c for c in COMMANDS}, "report": "report"},
    )
    for name in COMMAND_NODES:
        g.add_edge(name, "report")
    g.add_edge("report", END)

    return g.compile()


main_graph = build_graph()
