"""OpenTelemetry spans for training epochs and ensemble sampling.

Spans are opened unconditionally through :func:`get_tracer`; they only leave
the process once :func:`setup_tracing` has installed an OTLP exporter.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from opentelemetry import trace
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor

if TYPE_CHECKING:
    from retrodiff.config import Settings

logger = logging.getLogger(__name__)

TRACER_NAME = "retrodiff"
TRACES_PATH = "/v1/traces"


def traces_url(endpoint: str) -> str:
    return endpoint.rstrip("/") + TRACES_PATH


def setup_tracing(settings: Settings) -> bool:
    """Export spans to ``settings.otel_exporter_otlp_endpoint``; False when nothing was installed."""
    if not settings.otel_exporter_otlp_endpoint:
        logger.debug("no OTLP endpoint configured, spans stay local no-ops")
        return False
    url = traces_url(settings.otel_exporter_otlp_endpoint)
    try:
        provider = TracerProvider(resource=Resource.create({"service.name": settings.otel_service_name}))
        provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=url)))
        trace.set_tracer_provider(provider)
    except Exception:
        # a run never fails on tracing
        logger.exception("tracing setup failed for %s", url)
        return False
    logger.info("exporting spans as %s to %s", settings.otel_service_name, url)
    return True


def shutdown_tracing() -> None:
    provider = trace.get_tracer_provider()
    if not isinstance(provider, TracerProvider):
        return
    try:
        provider.shutdown()
    except Exception:
        logger.exception("tracing shutdown failed, buffered spans may be lost")


def get_tracer() -> trace.Tracer:
    return trace.get_tracer(TRACER_NAME)
