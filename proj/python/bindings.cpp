#include "relusnc/error.hpp"
#include "relusnc/executor.hpp"
#include "relusnc/iterprop.hpp"
#include "relusnc/nnet.hpp"
#include "relusnc/oracle.hpp"
#include "relusnc/presets.hpp"
#include "relusnc/property.hpp"
#include "relusnc/report.hpp"
#include "relusnc/serialize.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace relusnc;

namespace {

py::object to_python( const nlohmann::json &value )
{
    return py::module_::import( "json" ).attr( "loads" )( value.dump() );
}

py::dict result_dict( const QueryResult &result )
{
    py::dict out( "verdict"_a = std::string( to_string( result.verdict ) ) );
    if ( result.is_sat() )
        out["witness"] = result.witness;
    return out;
}

RunConfig make_run_config( const VnnFormula &formula, const std::string &preset, std::size_t workers,
                           std::optional<double> globalTimeout )
{
    std::optional<Preset> parsed = parse_preset( preset );
    if ( !parsed )
        throw PreconditionError( "unknown preset '" + preset + "'" );
    RunConfig config = preset_config( *parsed, formula, workers );
    config.snc.global_timeout = globalTimeout;
    return config;
}

} // namespace

PYBIND11_MODULE( _core, m )
{
    m.doc() = "Parallel verification of ReLU networks by Split-and-Conquer";

    static py::exception<Error> error( m, "Error" );
    static py::exception<ParseError> parseError( m, "ParseError", error.ptr() );
    static py::exception<PreconditionError> preconditionError( m, "PreconditionError", error.ptr() );
    static py::exception<EngineError> engineError( m, "EngineError", error.ptr() );
    py::register_exception_translator( []( std::exception_ptr p ) {
        try
        {
            if ( p )
                std::rethrow_exception( p );
        }
        catch ( const ParseError &e )
        {
            parseError( e.what() );
        }
        catch ( const PreconditionError &e )
        {
            preconditionError( e.what() );
        }
        catch ( const EngineError &e )
        {
            engineError( e.what() );
        }
        catch ( const Error &e )
        {
            error( e.what() );
        }
    } );

    py::class_<Network>( m, "Network", "Fully connected ReLU network" )
        .def_readonly( "layer_sizes", &Network::layer_sizes )
        .def_readonly( "input_mins", &Network::input_mins )
        .def_readonly( "input_maxs", &Network::input_maxs )
        .def( "evaluate", []( const Network &net, const std::vector<double> &x ) { return evaluate( net, x ); }, "x"_a )
        .def( "encode", []( const Network &net ) { return encode_network( net ); } );

    py::class_<VnnFormula>( m, "Formula", "Linear and ReLU constraints over bounded variables" )
        .def_readonly( "num_vars", &VnnFormula::num_vars )
        .def_readonly( "inputs", &VnnFormula::inputs )
        .def_readonly( "outputs", &VnnFormula::outputs )
        .def_property_readonly( "num_relus", []( const VnnFormula &f ) { return f.relus.size(); } )
        .def_property_readonly( "num_linear", []( const VnnFormula &f ) { return f.linear.size(); } )
        .def_property_readonly( "unfixed_relus", &VnnFormula::unfixed_count )
        .def( "check", []( const VnnFormula &f, const Assignment &a, double tol ) { return check_assignment( f, a, tol ); },
              "assignment"_a, "tol"_a = 1e-6 )
        .def( "to_text", []( const VnnFormula &f ) {
            std::ostringstream out;
            write_formula( out, f );
            return out.str();
        } )
        .def_static( "from_text", []( const std::string &text ) {
            std::istringstream in( text );
            return read_formula( in, "<text>" );
        } )
        .def( "__eq__", []( const VnnFormula &a, const VnnFormula &b ) { return a == b; } );

    m.def( "load_nnet", py::overload_cast<const std::string &>( &parse_nnet ), "path"_a );
    m.def( "property_query", []( const Network &net, const std::string &path ) {
        return encode_property( net, parse_property( path ) );
    }, "net"_a, "property_path"_a );
    m.def( "robustness_query",
           []( const Network &net, const std::vector<double> &center, double delta, std::size_t outIndex,
               double baseline, double epsilon, const std::string &side ) {
               if ( side != "upper" && side != "lower" )
                   throw PreconditionError( "side must be 'upper' or 'lower'" );
               return encode_robustness_query( net, center, delta, outIndex, baseline, epsilon,
                                               side == "upper" ? OutputSide::Upper : OutputSide::Lower );
           },
           "net"_a, "center"_a, "delta"_a, "out_index"_a, "baseline"_a, "epsilon"_a, "side"_a = "upper" );

    m.def( "polarity", py::overload_cast<double, double>( &polarity ), "lower"_a, "upper"_a );

    m.def( "solve", []( const VnnFormula &f, std::optional<double> timeout ) {
        SolverConfig config = default_solver_config( f );
        config.deadline = budget_deadline( timeout.value_or( kInfinity ), std::nullopt );
        QueryResult result;
        {
            py::gil_scoped_release release;
            result = solve( f, config );
        }
        return result_dict( result );
    }, "formula"_a, "timeout"_a = py::none() );

    m.def( "oracle", []( const VnnFormula &f ) { return result_dict( enumerate_phases_oracle( f ) ); }, "formula"_a );

    m.def( "iterative_propagate", []( const VnnFormula &f, double perReluTimeout, std::size_t workers ) {
        IterPropConfig config;
        config.per_relu_timeout = perReluTimeout;
        config.workers = workers;
        config.solver = default_solver_config( f );
        IterPropResult result;
        {
            py::gil_scoped_release release;
            result = iterative_propagate( f, config );
        }
        return py::make_tuple( result.formula, result.fixed, result.sweeps );
    }, "formula"_a, "per_relu_timeout"_a = 2.0, "workers"_a = 1 );

    m.def( "presets", []() {
        std::vector<std::string> names;
        for ( Preset p : all_presets() )
            names.emplace_back( to_string( p ) );
        return names;
    } );

    m.def( "default_config", []( const VnnFormula &f, std::size_t workers ) {
        return to_python( config_json( default_run_config( f, workers ) ) );
    }, "formula"_a, "workers"_a = 1 );

    m.def( "verify", []( const VnnFormula &f, const std::string &preset, std::size_t workers,
                         std::optional<double> globalTimeout ) {
        RunConfig config = make_run_config( f, preset, workers, globalTimeout );
        RunOutcome outcome;
        {
            py::gil_scoped_release release;
            outcome = run_query( f, config );
        }
        return to_python( report_json( outcome, config, f ) );
    }, "formula"_a, "preset"_a = "S", "workers"_a = 1, "global_timeout"_a = py::none(),
       "Run a preset and return the report as a dict" );
}
