#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dmrr/datasets.hpp"
#include "dmrr/error.hpp"

using namespace dmrr;

TEST_SUITE("datasets") {
    TEST_CASE("plain numeric text parses row-major") {
        const auto loaded = parse_matrix("1,2\n3,4");
        CHECK(loaded.matrix.n() == 2);
        CHECK(loaded.matrix.d() == 2);
        CHECK(loaded.matrix(0, 1) == 2.0);
        CHECK(loaded.matrix(1, 0) == 3.0);
        CHECK_FALSE(loaded.labels.has_value());
    }

    TEST_CASE("label column is split off") {
        LoadOptions opts;
        opts.label_column = 2;
        const auto loaded = parse_matrix("1,2,0\n3,4,1", opts);
        CHECK(loaded.matrix.d() == 2);
        CHECK(loaded.matrix(1, 1) == 4.0);
        REQUIRE(loaded.labels);
        CHECK(loaded.labels->ids() == std::vector<int>{0, 1});
    }

    TEST_CASE("label column in the middle keeps the other columns in order") {
        LoadOptions opts;
        opts.label_column = 1;
        const auto loaded = parse_matrix("1,a,2,3\n4,b,5,6\n7,a,8,9", opts);
        CHECK(loaded.matrix.d() == 3);
        CHECK(loaded.matrix(2, 0) == 7.0);
        CHECK(loaded.matrix(2, 1) == 8.0);
        CHECK(loaded.matrix(2, 2) == 9.0);
        CHECK(loaded.labels->num_classes() == 2);
    }

    TEST_CASE("ragged row reports its line") {
        try {
            (void)parse_matrix("1,2\n3");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }

    TEST_CASE("non-numeric feature cell") {
        CHECK_THROWS_AS(parse_matrix("1,2\n3,x"), ParseError);
    }

    TEST_CASE("too few samples or features") {
        CHECK_THROWS_AS(parse_matrix("1,2"), DimensionError);
        CHECK_THROWS_AS(parse_matrix("1\n2\n3"), DimensionError);
    }

    TEST_CASE("header row and tab delimiter") {
        LoadOptions opts;
        opts.delimiter = '\t';
        opts.has_header = true;
        const auto loaded = parse_matrix("f1\tf2\n1\t2\n3\t4\n", opts);
        CHECK(loaded.matrix.n() == 2);
        CHECK(loaded.matrix.feature_names() == std::vector<std::string>{"f1", "f2"});
    }

    TEST_CASE("label files") {
        const auto l = parse_labels("a\na\nb");
        CHECK(l.ids() == std::vector<int>{0, 0, 1});
        CHECK(l.num_classes() == 2);
        CHECK(parse_labels("1\n2\n3").num_classes() == 3);
        CHECK_THROWS(parse_labels(""));
        CHECK_THROWS_AS(parse_labels("x\nx\n"), DimensionError);
    }

    TEST_CASE("label pairing mismatch") {
        const auto m = parse_matrix("1,2\n3,4\n5,6").matrix;
        CHECK_THROWS_AS(check_pairing(m, parse_labels("a\nb")), DimensionError);
        CHECK_NOTHROW(check_pairing(m, parse_labels("a\nb\na")));
    }

    TEST_CASE("describe") {
        const auto s = describe(parse_matrix("0,1\n2,3").matrix);
        CHECK(s.n == 2);
        CHECK(s.d == 2);
        CHECK(s.mins == std::vector<double>{0, 1});
        CHECK(s.maxs == std::vector<double>{2, 3});

        const auto c = describe(parse_matrix("0.1,5\n0.1,6\n0.1,7").matrix);
        CHECK(c.mins[0] == c.maxs[0]);
        CHECK(c.means[0] == c.mins[0]);
    }

    TEST_CASE("load_matrix and describe round-trip the shape of a file") {
        const auto path = std::filesystem::temp_directory_path() / "dmrr_datasets_roundtrip.csv";
        {
            std::ofstream out(path);
            for (int i = 0; i < 7; ++i) out << i << ',' << i * 2 << ',' << -i << ",0.5\n";
        }
        const auto s = describe(load_matrix(path).matrix);
        CHECK(s.n == 7);
        CHECK(s.d == 4);
        std::filesystem::remove(path);
        CHECK_THROWS(load_matrix(path));
    }
}
