from seroclass.estimation.prevalence import AdaptiveResult, PrevalenceEstimate, adaptive_classify, estimate_prevalence
