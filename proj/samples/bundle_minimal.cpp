// Bundles the small sample graph and writes an SVG next to the binary.
#include <fstream>
#include <iostream>

#include "hbundle/hbundle.hpp"

int main(int argc, char** argv)
{
    const std::string dir = argc > 1 ? argv[1] : HBUNDLE_SAMPLES_DIR;
    std::ifstream nodes(dir + "/nodes.txt");
    std::ifstream edges(dir + "/edges.txt");
    if (!nodes || !edges) {
        std::cerr << "cannot read sample graph from " << dir << '\n';
        return 1;
    }

    const hbundle::Graph graph = hbundle::load_graph(nodes, edges);
    const std::vector<int> bins = hbundle::bin_by_orientation(graph, 4);

    hbundle::BundleConfig config;
    config.grid_size = 400;
    config.directed_offset_fraction = 0.002;
    const auto result = hbundle::bundle(graph, bins, hbundle::InteractionMatrix::repulsion(4, config.alpha), config);

    hbundle::ColorScheme scheme;
    scheme.kind = hbundle::ColorScheme::Kind::modal_hue;
    std::ofstream("sample.svg") << hbundle::render_svg(result, scheme, {});
    std::cout << graph.edges.size() << " edges bundled in " << result.bundling_seconds << " s -> sample.svg\n";
    return 0;
}
