from seroclass.sklearn.classifier import OptimalClassifier
